#include "qtd/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <thread>

namespace qtd::scenario {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Parsing helpers: every failure lands in the error list with its JSON path.
// ---------------------------------------------------------------------------

double get_number(const ordered_json& j, const std::string& key, const std::string& path,
                  std::vector<ValidationError>& errors, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) {
        errors.push_back({path + "." + key, "expected a number"});
        return fallback;
    }
    return j.at(key).get<double>();
}

int get_int(const ordered_json& j, const std::string& key, const std::string& path,
            std::vector<ValidationError>& errors, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer()) {
        errors.push_back({path + "." + key, "expected an integer"});
        return fallback;
    }
    return j.at(key).get<int>();
}

std::string get_string(const ordered_json& j, const std::string& key, const std::string& path,
                       std::vector<ValidationError>& errors, const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_string()) {
        errors.push_back({path + "." + key, "expected a string"});
        return fallback;
    }
    return j.at(key).get<std::string>();
}

/// Complex matrix literal: row-major rows of [re, im] pairs.
std::optional<Matrix> parse_matrix_literal(const ordered_json& j, const std::string& path,
                                           std::vector<ValidationError>& errors) {
    if (!j.is_array() || j.empty()) {
        errors.push_back({path, "expected a non-empty array of rows"});
        return std::nullopt;
    }
    const std::size_t nrows = j.size();
    Matrix m(nrows, nrows);
    for (std::size_t r = 0; r < nrows; ++r) {
        const auto& row = j.at(r);
        if (!row.is_array() || row.size() != nrows) {
            errors.push_back({path + "[" + std::to_string(r) + "]",
                              "expected a row of length " + std::to_string(nrows) +
                                  " (square matrix)"});
            return std::nullopt;
        }
        for (std::size_t c = 0; c < nrows; ++c) {
            const auto& entry = row.at(c);
            if (!entry.is_array() || entry.size() != 2 || !entry.at(0).is_number() ||
                !entry.at(1).is_number()) {
                errors.push_back({path + "[" + std::to_string(r) + "][" + std::to_string(c) + "]",
                                  "expected an [re, im] pair"});
                return std::nullopt;
            }
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                Complex(entry.at(0).get<double>(), entry.at(1).get<double>());
        }
    }
    return m;
}

/// Operator generators: matrix literal, diagonal, two_level, random_hermitian,
/// zero.
std::optional<Matrix> parse_operator(const ordered_json& j, const std::string& path,
                                     std::vector<ValidationError>& errors, int expected_dim,
                                     std::uint64_t seed, bool seed_given, bool* used_random) {
    if (!j.is_object()) {
        errors.push_back({path, "expected an operator object"});
        return std::nullopt;
    }
    std::optional<Matrix> m;
    if (j.contains("matrix")) {
        m = parse_matrix_literal(j.at("matrix"), path + ".matrix", errors);
    } else if (j.contains("diagonal")) {
        const auto& diag = j.at("diagonal");
        if (!diag.is_array() || diag.empty()) {
            errors.push_back({path + ".diagonal", "expected a non-empty array of numbers"});
            return std::nullopt;
        }
        Matrix d = Matrix::Zero(diag.size(), diag.size());
        for (std::size_t i = 0; i < diag.size(); ++i) {
            if (!diag.at(i).is_number()) {
                errors.push_back({path + ".diagonal[" + std::to_string(i) + "]",
                                  "expected a number"});
                return std::nullopt;
            }
            d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
                diag.at(i).get<double>();
        }
        m = d;
    } else if (j.contains("two_level")) {
        const double eps = get_number(j.at("two_level"), "epsilon", path + ".two_level", errors,
                                      1.0);
        Matrix d = Matrix::Zero(2, 2);
        d(1, 1) = eps;
        m = d;
    } else if (j.contains("random_hermitian")) {
        const double scale =
            get_number(j.at("random_hermitian"), "scale", path + ".random_hermitian", errors, 1.0);
        if (!seed_given) {
            errors.push_back({path + ".random_hermitian",
                              "random operators require a top-level seed"});
            return std::nullopt;
        }
        if (expected_dim <= 0) {
            errors.push_back({path + ".random_hermitian", "dimension not determined"});
            return std::nullopt;
        }
        if (used_random) *used_random = true;
        Rng rng(seed, path);
        m = random_hermitian(expected_dim, rng, scale).mat();
    } else if (j.contains("zero")) {
        if (expected_dim <= 0) {
            errors.push_back({path + ".zero", "dimension not determined"});
            return std::nullopt;
        }
        m = Matrix::Zero(expected_dim, expected_dim);
    } else {
        errors.push_back(
            {path, "expected one of: matrix, diagonal, two_level, random_hermitian, zero"});
        return std::nullopt;
    }
    if (m && expected_dim > 0 && m->rows() != expected_dim) {
        errors.push_back({path, "operator is " + std::to_string(m->rows()) + "x" +
                                    std::to_string(m->cols()) + " but the configured dims need " +
                                    std::to_string(expected_dim) + "x" +
                                    std::to_string(expected_dim)});
        return std::nullopt;
    }
    return m;
}

/// Scalar or vector piecewise-linear protocol:
///   42.0                        constant scalar
///   [1.0, 2.0]                  constant vector
///   {"times": [...], "values": [...]}   nodes; values scalar or vector
std::optional<Protocol> parse_protocol(const ordered_json& j, const std::string& path,
                                       std::vector<ValidationError>& errors) {
    if (j.is_number()) {
        return Protocol::constant(j.get<double>());
    }
    if (j.is_array()) {
        RealVector v(j.size());
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j.at(i).is_number()) {
                errors.push_back({path + "[" + std::to_string(i) + "]", "expected a number"});
                return std::nullopt;
            }
            v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
        }
        return Protocol::constant(v);
    }
    if (j.is_object() && j.contains("times") && j.contains("values")) {
        const auto& jt = j.at("times");
        const auto& jv = j.at("values");
        if (!jt.is_array() || !jv.is_array() || jt.size() != jv.size() || jt.empty()) {
            errors.push_back({path, "times/values must be equally sized non-empty arrays"});
            return std::nullopt;
        }
        std::vector<double> times;
        std::vector<RealVector> values;
        for (std::size_t i = 0; i < jt.size(); ++i) {
            if (!jt.at(i).is_number()) {
                errors.push_back({path + ".times[" + std::to_string(i) + "]",
                                  "expected a number"});
                return std::nullopt;
            }
            times.push_back(jt.at(i).get<double>());
            const auto& val = jv.at(i);
            if (val.is_number()) {
                values.push_back(RealVector::Constant(1, val.get<double>()));
            } else if (val.is_array()) {
                RealVector v(val.size());
                for (std::size_t k = 0; k < val.size(); ++k) {
                    if (!val.at(k).is_number()) {
                        errors.push_back({path + ".values[" + std::to_string(i) + "]",
                                          "expected numbers"});
                        return std::nullopt;
                    }
                    v(static_cast<Eigen::Index>(k)) = val.at(k).get<double>();
                }
                values.push_back(v);
            } else {
                errors.push_back({path + ".values[" + std::to_string(i) + "]",
                                  "expected a number or an array"});
                return std::nullopt;
            }
        }
        try {
            return Protocol(std::move(times), std::move(values));
        } catch (const std::exception& e) {
            errors.push_back({path, e.what()});
            return std::nullopt;
        }
    }
    errors.push_back({path, "expected a number, an array or a {times, values} object"});
    return std::nullopt;
}

struct OperatorBlock {
    Matrix base;
    std::vector<Matrix> couple_own;
    std::vector<Matrix> couple_shared;
};

std::optional<OperatorBlock> parse_block(const ordered_json& j, const std::string& path,
                                         std::vector<ValidationError>& errors, int dim,
                                         std::uint64_t seed, bool seed_given, bool* used_random,
                                         int n_own, int n_shared, bool allow_shared) {
    if (!j.is_object()) {
        errors.push_back({path, "expected an object"});
        return std::nullopt;
    }
    OperatorBlock block;
    const ordered_json& base_spec = j.contains("base") ? j.at("base") : j;
    auto base = parse_operator(base_spec, path + (j.contains("base") ? ".base" : ""), errors, dim,
                               seed, seed_given, used_random);
    if (!base) return std::nullopt;
    block.base = *base;

    auto parse_list = [&](const char* key, std::vector<Matrix>& out, int expected_count) {
        if (!j.contains(key)) {
            if (expected_count > 0) {
                errors.push_back({path, std::string("missing ") + key + " for a protocol with " +
                                            std::to_string(expected_count) + " components"});
            }
            return;
        }
        const auto& arr = j.at(key);
        if (!arr.is_array()) {
            errors.push_back({path + "." + key, "expected an array of operators"});
            return;
        }
        if (static_cast<int>(arr.size()) != expected_count) {
            errors.push_back({path + "." + key,
                              "has " + std::to_string(arr.size()) + " operators but the protocol has " +
                                  std::to_string(expected_count) + " components"});
            return;
        }
        for (std::size_t i = 0; i < arr.size(); ++i) {
            auto op = parse_operator(arr.at(i), path + "." + key + "[" + std::to_string(i) + "]",
                                     errors, dim, seed, seed_given, used_random);
            if (op) out.push_back(*op);
        }
    };
    parse_list("couple_own", block.couple_own, n_own);
    if (allow_shared) parse_list("couple_shared", block.couple_shared, n_shared);
    return block;
}

std::optional<Protocol> parse_scalar_course(const ordered_json& parent, const std::string& key,
                                            const std::string& path,
                                            std::vector<ValidationError>& errors,
                                            double fallback) {
    if (!parent.contains(key)) return Protocol::constant(fallback);
    auto p = parse_protocol(parent.at(key), path + "." + key, errors);
    if (!p) return std::nullopt;
    if (p->size() != 1) {
        errors.push_back({path + "." + key, "expected a scalar course"});
        return std::nullopt;
    }
    return p;
}

}  // namespace

Temperatures ScenarioConfig::temps_at(double t) const {
    Temperatures temps;
    temps.theta = theta.scalar_value(t);
    temps.theta1 = theta1.scalar_value(t);
    temps.theta2 = theta2.scalar_value(t);
    temps.t_box = t_box.scalar_value(t);
    temps.t1 = t1.scalar_value(t);
    temps.t2 = t2.scalar_value(t);
    if (t12) temps.t12 = t12->scalar_value(t);
    if (theta12) temps.theta12 = theta12->scalar_value(t);
    return temps;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

ValidationResult validate_json(const ordered_json& j, const std::string& name_hint) {
    ValidationResult result;
    std::vector<ValidationError>& errors = result.errors;
    ScenarioConfig cfg;

    if (!j.is_object()) {
        errors.push_back({"", "config root must be an object"});
        return result;
    }

    const std::string schema = get_string(j, "schema", "", errors, "");
    if (schema != kSchemaVersion) {
        errors.push_back({"schema", "expected \"" + std::string(kSchemaVersion) + "\", got \"" +
                                        schema + "\""});
    }
    cfg.name = get_string(j, "name", "", errors, name_hint);

    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer()) {
            errors.push_back({"seed", "expected a non-negative integer"});
        } else {
            cfg.seed = j.at("seed").get<std::uint64_t>();
            cfg.seed_given = true;
        }
    }

    if (j.contains("constants")) {
        cfg.consts.k_B = get_number(j.at("constants"), "k_B", "constants", errors, 1.0);
        cfg.consts.hbar = get_number(j.at("constants"), "hbar", "constants", errors, 1.0);
        if (cfg.consts.k_B <= 0.0) errors.push_back({"constants.k_B", "must be positive"});
        if (cfg.consts.hbar <= 0.0) errors.push_back({"constants.hbar", "must be positive"});
    }
    cfg.z_constant = get_number(j, "z_constant", "", errors, 1.0);
    if (cfg.z_constant <= 0.0) errors.push_back({"z_constant", "must be positive"});

    // --- system block ---
    int d1 = 0, d2 = 0, dim = 0;
    if (!j.contains("system") || !j.at("system").is_object()) {
        errors.push_back({"system", "missing system object"});
    } else {
        const auto& sys = j.at("system");
        const std::string kind = get_string(sys, "kind", "system", errors, "");
        if (kind == "bipartite") {
            cfg.kind = SystemKind::bipartite;
            if (!sys.contains("dims") || !sys.at("dims").is_object()) {
                errors.push_back({"system.dims", "missing dims object with d1, d2"});
            } else {
                d1 = get_int(sys.at("dims"), "d1", "system.dims", errors, 0);
                d2 = get_int(sys.at("dims"), "d2", "system.dims", errors, 0);
                if (d1 < 1) errors.push_back({"system.dims.d1", "must be >= 1"});
                if (d2 < 1) errors.push_back({"system.dims.d2", "must be >= 1"});
            }
        } else if (kind == "undecomposed") {
            cfg.kind = SystemKind::undecomposed;
            dim = get_int(sys, "dim", "system", errors, 0);
            if (dim < 1) errors.push_back({"system.dim", "must be >= 1"});
        } else {
            errors.push_back({"system.kind", "expected \"bipartite\" or \"undecomposed\""});
        }
    }
    if (!errors.empty()) return result;
    if (cfg.kind == SystemKind::bipartite) {
        cfg.dims = HilbertDims(d1, d2);
        cfg.dim = cfg.dims.total();
    } else {
        cfg.dim = dim;
    }

    // --- protocols ---
    Protocol a1, a2, a12, a_un;
    if (j.contains("protocols")) {
        const auto& pj = j.at("protocols");
        if (!pj.is_object()) {
            errors.push_back({"protocols", "expected an object"});
        } else {
            auto grab = [&](const char* key, Protocol& target) {
                if (pj.contains(key)) {
                    auto p = parse_protocol(pj.at(key), std::string("protocols.") + key, errors);
                    if (p) target = *p;
                }
            };
            if (cfg.kind == SystemKind::bipartite) {
                grab("a1", a1);
                grab("a2", a2);
                grab("a12", a12);
            } else {
                grab("a", a_un);
            }
        }
    }

    // --- hamiltonian ---
    bool used_random = false;
    if (!j.contains("hamiltonian") || !j.at("hamiltonian").is_object()) {
        errors.push_back({"hamiltonian", "missing hamiltonian object"});
        return result;
    }
    const auto& hj = j.at("hamiltonian");
    if (cfg.kind == SystemKind::bipartite) {
        if (!hj.contains("h1") || !hj.contains("h2") || !hj.contains("h12")) {
            errors.push_back({"hamiltonian", "bipartite systems need h1, h2 and h12 blocks"});
            return result;
        }
        auto b1 = parse_block(hj.at("h1"), "hamiltonian.h1", errors, d1, cfg.seed, cfg.seed_given,
                              &used_random, a1.size(), a12.size(), true);
        auto b2 = parse_block(hj.at("h2"), "hamiltonian.h2", errors, d2, cfg.seed, cfg.seed_given,
                              &used_random, a2.size(), a12.size(), true);
        auto b12 = parse_block(hj.at("h12"), "hamiltonian.h12", errors, d1 * d2, cfg.seed,
                               cfg.seed_given, &used_random, a12.size(), 0, false);
        if (!b1 || !b2 || !b12 || !errors.empty()) return result;
        try {
            cfg.triple = HamiltonianTriple::linear(
                cfg.dims, HamiltonianTriple::LinearBlock{b1->base, b1->couple_own,
                                                         b1->couple_shared},
                HamiltonianTriple::LinearBlock{b2->base, b2->couple_own, b2->couple_shared},
                b12->base, b12->couple_own, a1, a2, a12);
        } catch (const std::exception& e) {
            errors.push_back({"hamiltonian", e.what()});
            return result;
        }
        cfg.h2_sub_static = b2->base;
    } else {
        if (!hj.contains("h")) {
            errors.push_back({"hamiltonian", "undecomposed systems need an h block"});
            return result;
        }
        auto b = parse_block(hj.at("h"), "hamiltonian.h", errors, dim, cfg.seed, cfg.seed_given,
                             &used_random, a_un.size(), 0, false);
        if (!b || !errors.empty()) return result;
        try {
            cfg.hamiltonian = HamiltonianProtocol::linear(b->base, b->couple_own, a_un);
        } catch (const std::exception& e) {
            errors.push_back({"hamiltonian.h", e.what()});
            return result;
        }
    }

    // --- temperatures ---
    const ordered_json temps_j =
        j.contains("temperatures") ? j.at("temperatures") : ordered_json::object();
    const std::string mode = get_string(temps_j, "mode", "temperatures", errors, "prescribed");
    if (mode == "prescribed") {
        cfg.temp_mode = TemperatureMode::prescribed;
    } else if (mode == "extracted") {
        cfg.temp_mode = TemperatureMode::extracted;
    } else {
        errors.push_back({"temperatures.mode", "expected \"prescribed\" or \"extracted\""});
    }
    auto course = [&](const char* key, Protocol& target, double fallback) {
        auto p = parse_scalar_course(temps_j, key, "temperatures", errors, fallback);
        if (p) target = *p;
    };
    course("theta", cfg.theta, 1.0);
    course("theta1", cfg.theta1, 1.0);
    course("theta2", cfg.theta2, 1.0);
    course("t_box", cfg.t_box, 1.0);
    course("t1", cfg.t1, 1.0);
    course("t2", cfg.t2, 1.0);
    if (temps_j.contains("t12")) {
        auto p = parse_scalar_course(temps_j, "t12", "temperatures", errors, 1.0);
        if (p) cfg.t12 = *p;
    }
    if (temps_j.contains("theta12")) {
        auto p = parse_scalar_course(temps_j, "theta12", "temperatures", errors, 1.0);
        if (p) cfg.theta12 = *p;
    }

    // --- omega ---
    const ordered_json omega_j = j.contains("omega") ? j.at("omega") : ordered_json::object();
    cfg.omega_ex = ConstitutiveOmega{ConstitutiveOmega::Kind::linear,
                                     get_number(omega_j, "kappa_ex", "omega", errors, 1.0),
                                     ConstitutiveOmega::Channel::external};
    cfg.omega_int = ConstitutiveOmega{ConstitutiveOmega::Kind::linear,
                                      get_number(omega_j, "kappa_int", "omega", errors, 1.0),
                                      ConstitutiveOmega::Channel::internal};
    if (cfg.omega_ex.kappa <= 0.0) errors.push_back({"omega.kappa_ex", "must be positive"});
    if (cfg.omega_int.kappa <= 0.0) errors.push_back({"omega.kappa_int", "must be positive"});

    // --- propagator policy ---
    const ordered_json pol_j =
        j.contains("propagator") ? j.at("propagator") : ordered_json::object();
    const std::string policy = get_string(pol_j, "policy", "propagator", errors, "none");
    if (policy == "none") {
        cfg.policy = PolicyKind::none;
    } else if (policy == "separation") {
        cfg.policy = PolicyKind::separation;
        cfg.separation_rate = get_number(pol_j, "rate", "propagator", errors, 1.0);
        const std::string target = get_string(pol_j, "target", "propagator", errors, "both");
        if (target == "both") {
            cfg.separation_target = 0;
        } else if (target == "sub1") {
            cfg.separation_target = 1;
        } else if (target == "sub2") {
            cfg.separation_target = 2;
        } else {
            errors.push_back({"propagator.target", "expected \"both\", \"sub1\" or \"sub2\""});
        }
    } else if (policy == "reservoir") {
        cfg.policy = PolicyKind::reservoir;
        if (cfg.kind != SystemKind::bipartite) {
            errors.push_back({"propagator.policy", "reservoir policy needs a bipartite system"});
        } else {
            auto p = parse_scalar_course(pol_j, "T_HR", "propagator", errors, 1.0);
            if (p) cfg.t_hr = *p;
            if (!pol_j.contains("T_HR")) {
                errors.push_back({"propagator.T_HR", "reservoir policy needs a T_HR course"});
            }
            if (!a2.empty() && !a2.is_static()) {
                errors.push_back({"protocols.a2",
                                  "reservoir policy requires a quasi-static reservoir block"});
            }
            if (!a12.empty() && !a12.is_static()) {
                errors.push_back({"protocols.a12",
                                  "reservoir policy requires a static partition protocol"});
            }
        }
    } else if (policy == "constrained") {
        cfg.policy = PolicyKind::constrained;
        const std::string support = get_string(pol_j, "support", "propagator", errors, "full");
        if (support == "full") {
            cfg.support = PropagatorSupport::full;
        } else if (support == "diagonal") {
            cfg.support = PropagatorSupport::diagonal;
        } else {
            errors.push_back({"propagator.support", "expected \"full\" or \"diagonal\""});
        }
    } else {
        errors.push_back({"propagator.policy",
                          "expected one of: none, separation, reservoir, constrained"});
    }

    // --- integration ---
    const ordered_json int_j =
        j.contains("integration") ? j.at("integration") : ordered_json::object();
    cfg.t_end = get_number(int_j, "t_end", "integration", errors, 1.0);
    cfg.dt = get_number(int_j, "dt", "integration", errors, 1e-3);
    cfg.record_every = get_int(int_j, "record_every", "integration", errors, 1);
    if (cfg.dt <= 0.0) errors.push_back({"integration.dt", "must be positive"});
    if (cfg.t_end < 0.0) errors.push_back({"integration.t_end", "must be non-negative"});
    if (cfg.record_every < 1) errors.push_back({"integration.record_every", "must be >= 1"});

    // --- tolerances ---
    const ordered_json tol_j =
        j.contains("tolerances") ? j.at("tolerances") : ordered_json::object();
    cfg.inequality_tol = get_number(tol_j, "inequality", "tolerances", errors, 1e-9);
    cfg.partition_tol = get_number(tol_j, "partition", "tolerances", errors, 1e-10);
    cfg.abort_negativity = get_number(tol_j, "abort_negativity", "tolerances", errors, 1e-8);

    // --- initial state ---
    if (!j.contains("initial_state") || !j.at("initial_state").is_object()) {
        errors.push_back({"initial_state", "missing initial_state object"});
        return result;
    }
    const auto& init_j = j.at("initial_state");
    const std::string init_type = get_string(init_j, "type", "initial_state", errors, "");
    try {
        if (init_type == "canonical") {
            const double th = get_number(init_j, "theta", "initial_state", errors, 1.0);
            const Matrix h0 = cfg.kind == SystemKind::bipartite ? cfg.triple.total_at(0.0)
                                                                : cfg.hamiltonian.at(0.0);
            DensityOperator rho = canonical(HermitianOp(h0), th, cfg.consts);
            cfg.initial = DensityOperator::make(
                rho.mat(), cfg.kind == SystemKind::bipartite
                               ? std::optional<HilbertDims>(cfg.dims)
                               : std::nullopt);
        } else if (init_type == "product_canonical") {
            if (cfg.kind != SystemKind::bipartite) {
                errors.push_back({"initial_state.type",
                                  "product_canonical needs a bipartite system"});
                return result;
            }
            const double th1 = get_number(init_j, "theta1", "initial_state", errors, 1.0);
            const double th2 = get_number(init_j, "theta2", "initial_state", errors, 1.0);
            const Matrix h1s = partial_trace(cfg.triple.h1_at(0.0), 2, cfg.dims) /
                               static_cast<double>(cfg.dims.d2);
            const Matrix h2s = partial_trace(cfg.triple.h2_at(0.0), 1, cfg.dims) /
                               static_cast<double>(cfg.dims.d1);
            const Matrix rho = kronecker(canonical(HermitianOp(h1s), th1, cfg.consts).mat(),
                                         canonical(HermitianOp(h2s), th2, cfg.consts).mat());
            cfg.initial = DensityOperator::make(rho, cfg.dims);
        } else if (init_type == "microcanonical") {
            cfg.initial = DensityOperator::make(
                microcanonical(cfg.dim).mat(), cfg.kind == SystemKind::bipartite
                                                   ? std::optional<HilbertDims>(cfg.dims)
                                                   : std::nullopt);
        } else if (init_type == "matrix") {
            if (!init_j.contains("matrix")) {
                errors.push_back({"initial_state.matrix", "missing matrix literal"});
                return result;
            }
            auto m = parse_matrix_literal(init_j.at("matrix"), "initial_state.matrix", errors);
            if (!m) return result;
            if (m->rows() != cfg.dim) {
                errors.push_back({"initial_state.matrix",
                                  "state is " + std::to_string(m->rows()) + "x" +
                                      std::to_string(m->cols()) + " but the configured dims need " +
                                      std::to_string(cfg.dim)});
                return result;
            }
            cfg.initial = DensityOperator::make(*m, cfg.kind == SystemKind::bipartite
                                                        ? std::optional<HilbertDims>(cfg.dims)
                                                        : std::nullopt);
        } else if (init_type == "weights") {
            if (!init_j.contains("p") || !init_j.at("p").is_array()) {
                errors.push_back({"initial_state.p", "missing probability array"});
                return result;
            }
            RealVector p(init_j.at("p").size());
            for (std::size_t i = 0; i < init_j.at("p").size(); ++i) {
                p(static_cast<Eigen::Index>(i)) = init_j.at("p").at(i).get<double>();
            }
            if (p.size() != cfg.dim) {
                errors.push_back({"initial_state.p", "needs exactly " + std::to_string(cfg.dim) +
                                                         " weights"});
                return result;
            }
            cfg.initial = from_weights(Matrix::Identity(cfg.dim, cfg.dim), p,
                                       cfg.kind == SystemKind::bipartite
                                           ? std::optional<HilbertDims>(cfg.dims)
                                           : std::nullopt);
        } else if (init_type == "random") {
            if (!cfg.seed_given) {
                errors.push_back({"initial_state", "random states require a top-level seed"});
                return result;
            }
            used_random = true;
            Rng rng(cfg.seed, "initial_state");
            cfg.initial = DensityOperator::make(random_density_matrix(cfg.dim, rng),
                                                cfg.kind == SystemKind::bipartite
                                                    ? std::optional<HilbertDims>(cfg.dims)
                                                    : std::nullopt);
        } else {
            errors.push_back({"initial_state.type",
                              "expected one of: canonical, product_canonical, microcanonical, "
                              "matrix, weights, random"});
            return result;
        }
    } catch (const std::exception& e) {
        errors.push_back({"initial_state", e.what()});
        return result;
    }

    // --- output ---
    const ordered_json out_j = j.contains("output") ? j.at("output") : ordered_json::object();
    cfg.out_dir = get_string(out_j, "dir", "output", errors, "");
    cfg.basename = get_string(out_j, "basename", "output", errors, cfg.name);
    if (cfg.basename.empty()) {
        errors.push_back({"output.basename", "empty basename (give output.basename or name)"});
    }

    if (!errors.empty()) return result;

    if (cfg.policy == PolicyKind::reservoir) {
        // Quasi-static check: the reservoir temperature must drift slowly.
        for (int i = 0; i <= 100; ++i) {
            const double t = cfg.t_end * i / 100.0;
            const double value = cfg.t_hr.scalar_value(t);
            const double rate = cfg.t_hr.scalar_rate(t);
            if (value <= 0.0) {
                errors.push_back({"propagator.T_HR", "must stay positive over the run"});
                return result;
            }
            if (std::abs(rate) > 1e-2 * value) {
                result.warnings.push_back(
                    {"propagator.T_HR",
                     "|dT_HR/dt| = " + std::to_string(std::abs(rate)) + " at t=" +
                         std::to_string(t) + " exceeds 1e-2 * T_HR; the quasi-static "
                         "reservoir picture is strained"});
                break;
            }
        }
    }

    // Normalized round-trippable image: the original object with defaults
    // made explicit.
    ordered_json resolved = j;
    resolved["schema"] = kSchemaVersion;
    resolved["name"] = cfg.name;
    if (!resolved.contains("constants")) resolved["constants"] = ordered_json::object();
    resolved["constants"]["k_B"] = cfg.consts.k_B;
    resolved["constants"]["hbar"] = cfg.consts.hbar;
    resolved["z_constant"] = cfg.z_constant;
    if (!resolved.contains("temperatures")) resolved["temperatures"] = ordered_json::object();
    resolved["temperatures"]["mode"] =
        cfg.temp_mode == TemperatureMode::prescribed ? "prescribed" : "extracted";
    for (const char* key : {"theta", "theta1", "theta2", "t_box", "t1", "t2"}) {
        if (!resolved["temperatures"].contains(key)) resolved["temperatures"][key] = 1.0;
    }
    if (!resolved.contains("omega")) resolved["omega"] = ordered_json::object();
    resolved["omega"]["kappa_ex"] = cfg.omega_ex.kappa;
    resolved["omega"]["kappa_int"] = cfg.omega_int.kappa;
    if (!resolved.contains("propagator")) resolved["propagator"] = ordered_json::object();
    resolved["propagator"]["policy"] = policy;
    if (!resolved.contains("integration")) resolved["integration"] = ordered_json::object();
    resolved["integration"]["t_end"] = cfg.t_end;
    resolved["integration"]["dt"] = cfg.dt;
    resolved["integration"]["record_every"] = cfg.record_every;
    if (!resolved.contains("tolerances")) resolved["tolerances"] = ordered_json::object();
    resolved["tolerances"]["inequality"] = cfg.inequality_tol;
    resolved["tolerances"]["partition"] = cfg.partition_tol;
    resolved["tolerances"]["abort_negativity"] = cfg.abort_negativity;
    if (!resolved.contains("output")) resolved["output"] = ordered_json::object();
    resolved["output"]["basename"] = cfg.basename;
    cfg.resolved = std::move(resolved);

    result.config = std::move(cfg);
    return result;
}

ValidationResult validate_file(const std::string& path) {
    ValidationResult result;
    std::ifstream in(path);
    if (!in) {
        result.errors.push_back({"", "cannot open " + path});
        return result;
    }
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        result.errors.push_back({"", std::string("JSON parse error: ") + e.what()});
        return result;
    }
    return validate_json(j, fs::path(path).stem().string());
}

// ---------------------------------------------------------------------------
// CSV columns
// ---------------------------------------------------------------------------

namespace {

using LedgerField = std::pair<const char*, double ExchangeLedger::*>;

const std::vector<LedgerField>& bipartite_fields() {
    static const std::vector<LedgerField> fields = {
        {"E", &ExchangeLedger::E},
        {"E1", &ExchangeLedger::E1},
        {"E2", &ExchangeLedger::E2},
        {"E12", &ExchangeLedger::E12},
        {"W1_ex", &ExchangeLedger::W1_ex},
        {"W2_ex", &ExchangeLedger::W2_ex},
        {"W_ex", &ExchangeLedger::W_ex},
        {"W1_int", &ExchangeLedger::W1_int},
        {"W2_int", &ExchangeLedger::W2_int},
        {"W12_int", &ExchangeLedger::W12_int},
        {"W_int_sum", &ExchangeLedger::W_int_sum},
        {"Q1", &ExchangeLedger::Q1},
        {"Q2", &ExchangeLedger::Q2},
        {"Q12", &ExchangeLedger::Q12},
        {"Q_total", &ExchangeLedger::Q_total},
        {"Q1_ex", &ExchangeLedger::Q1_ex},
        {"Q2_ex", &ExchangeLedger::Q2_ex},
        {"Q12_ex", &ExchangeLedger::Q12_ex},
        {"Q_ex", &ExchangeLedger::Q_ex},
        {"Q1_int", &ExchangeLedger::Q1_int},
        {"Q2_int", &ExchangeLedger::Q2_int},
        {"Q12_int", &ExchangeLedger::Q12_int},
        {"Q_int", &ExchangeLedger::Q_int},
        {"E1_dot", &ExchangeLedger::E1_dot},
        {"E2_dot", &ExchangeLedger::E2_dot},
        {"E12_dot", &ExchangeLedger::E12_dot},
        {"E_dot", &ExchangeLedger::E_dot},
        {"S", &ExchangeLedger::S},
        {"S1", &ExchangeLedger::S1},
        {"S2", &ExchangeLedger::S2},
        {"S_gap", &ExchangeLedger::S_gap},
        {"S_dot", &ExchangeLedger::S_dot},
        {"S1_dot", &ExchangeLedger::S1_dot},
        {"S2_dot", &ExchangeLedger::S2_dot},
        {"S1_dot_ex", &ExchangeLedger::S1_dot_ex},
        {"S1_dot_int", &ExchangeLedger::S1_dot_int},
        {"S2_dot_ex", &ExchangeLedger::S2_dot_ex},
        {"S2_dot_int", &ExchangeLedger::S2_dot_int},
        {"Xi", &ExchangeLedger::Xi},
        {"Xi1_ex", &ExchangeLedger::Xi1_ex},
        {"Xi2_ex", &ExchangeLedger::Xi2_ex},
        {"Xi1_int", &ExchangeLedger::Xi1_int},
        {"Xi2_int", &ExchangeLedger::Xi2_int},
        {"Xi_box", &ExchangeLedger::Xi_box},
        {"Sigma1", &ExchangeLedger::Sigma1},
        {"Sigma2", &ExchangeLedger::Sigma2},
        {"Sigma1_oqu", &ExchangeLedger::Sigma1_oqu},
        {"Sigma2_oqu", &ExchangeLedger::Sigma2_oqu},
        {"Sigma", &ExchangeLedger::Sigma},
        {"Sigma_iso_form", &ExchangeLedger::Sigma_iso_form},
        {"Sigma_form_gap", &ExchangeLedger::Sigma_form_gap},
        {"theta", &ExchangeLedger::theta},
        {"theta1", &ExchangeLedger::theta1},
        {"theta2", &ExchangeLedger::theta2},
        {"t_box", &ExchangeLedger::t_box},
        {"t1", &ExchangeLedger::t1},
        {"t2", &ExchangeLedger::t2},
        {"theta_extracted", &ExchangeLedger::theta_extracted},
        {"theta_extracted_ok", &ExchangeLedger::theta_extracted_ok},
        {"theta1_extracted", &ExchangeLedger::theta1_extracted},
        {"theta1_extracted_ok", &ExchangeLedger::theta1_extracted_ok},
        {"theta2_extracted", &ExchangeLedger::theta2_extracted},
        {"theta2_extracted_ok", &ExchangeLedger::theta2_extracted_ok},
        {"r_first_law", &ExchangeLedger::r_first_law},
        {"r_heat_sum", &ExchangeLedger::r_heat_sum},
        {"r_heat_ex", &ExchangeLedger::r_heat_ex},
        {"r_heat_int", &ExchangeLedger::r_heat_int},
        {"r_split_trace", &ExchangeLedger::r_split_trace},
        {"r_entropy_rate_cd", &ExchangeLedger::r_entropy_rate_cd},
        {"inert_constraint", &ExchangeLedger::inert_constraint},
        {"inert_flag", &ExchangeLedger::inert_flag},
        {"mono_sheet_flag", &ExchangeLedger::mono_sheet_flag},
        {"trace_defect", &ExchangeLedger::trace_defect},
        {"herm_drift", &ExchangeLedger::herm_drift},
        {"min_eigenvalue", &ExchangeLedger::min_eigenvalue},
    };
    return fields;
}

const std::vector<LedgerField>& undecomposed_fields() {
    static const std::vector<LedgerField> fields = {
        {"E", &ExchangeLedger::E},
        {"W", &ExchangeLedger::W_ex},
        {"Q", &ExchangeLedger::Q_total},
        {"Q_ex", &ExchangeLedger::Q_ex},
        {"Q_int", &ExchangeLedger::Q_int},
        {"E_dot", &ExchangeLedger::E_dot},
        {"S", &ExchangeLedger::S},
        {"S_dot", &ExchangeLedger::S_dot},
        {"Xi", &ExchangeLedger::Xi},
        {"Sigma", &ExchangeLedger::Sigma},
        {"Sigma_iso_form", &ExchangeLedger::Sigma_iso_form},
        {"Sigma_form_gap", &ExchangeLedger::Sigma_form_gap},
        {"theta", &ExchangeLedger::theta},
        {"t_box", &ExchangeLedger::t_box},
        {"theta_extracted", &ExchangeLedger::theta_extracted},
        {"theta_extracted_ok", &ExchangeLedger::theta_extracted_ok},
        {"r_first_law", &ExchangeLedger::r_first_law},
        {"r_split_trace", &ExchangeLedger::r_split_trace},
        {"trace_defect", &ExchangeLedger::trace_defect},
        {"herm_drift", &ExchangeLedger::herm_drift},
        {"min_eigenvalue", &ExchangeLedger::min_eigenvalue},
    };
    return fields;
}

const std::vector<LedgerField>& fields_for(SystemKind kind) {
    return kind == SystemKind::bipartite ? bipartite_fields() : undecomposed_fields();
}

std::string format_double(double v) {
    if (v == 0.0) v = 0.0;  // fold negative zero
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Invariant monitoring
// ---------------------------------------------------------------------------

class InvariantMonitor {
  public:
    /// Residual invariants: violated when |value| exceeds the bound.
    void residual(const std::string& name, double value, double bound, double t) {
        record(name, std::abs(value), std::abs(value) > bound, t, true);
    }
    /// Lower-bound invariants: violated when the margin drops below -tol.
    void margin(const std::string& name, double value, double tol, double t,
                bool applicable = true) {
        record(name, value, applicable && value < -tol, t, false);
    }

    std::vector<InvariantSummary> summaries() const {
        std::vector<InvariantSummary> out;
        out.reserve(order_.size());
        for (const auto& name : order_) out.push_back(entries_.at(name));
        return out;
    }

  private:
    void record(const std::string& name, double value, bool violated, double t,
                bool residual_kind) {
        auto it = entries_.find(name);
        if (it == entries_.end()) {
            order_.push_back(name);
            it = entries_.emplace(name, InvariantSummary{name, 0, value, std::nullopt}).first;
        } else {
            // Residuals track the largest magnitude, margins the most negative.
            if (residual_kind ? value > it->second.worst : value < it->second.worst) {
                it->second.worst = value;
            }
        }
        if (violated) {
            ++it->second.violations;
            if (!it->second.first_violation_time) it->second.first_violation_time = t;
        }
    }

    std::vector<std::string> order_;
    std::map<std::string, InvariantSummary> entries_;
};

// ---------------------------------------------------------------------------
// Propagator policies
// ---------------------------------------------------------------------------

Matrix embed1(const Matrix& m, const HilbertDims& d) {
    return kronecker(m, Matrix::Identity(d.d2, d.d2));
}
Matrix embed2(const Matrix& m, const HilbertDims& d) {
    return kronecker(Matrix::Identity(d.d1, d.d1), m);
}

PropagatorPolicy build_policy(const ScenarioConfig& cfg) {
    switch (cfg.policy) {
        case PolicyKind::none:
            return [](double, const DensityOperator& rho) {
                return Propagator::zero(rho.dim());
            };
        case PolicyKind::separation:
            if (cfg.kind == SystemKind::undecomposed) {
                return [cfg](double t, const DensityOperator& rho) {
                    const Propagator sep = separation_propagator(
                        HermitianOp(cfg.hamiltonian.at(t)), rho, cfg.z_constant);
                    return Propagator::make_split(sep.ex(), cfg.separation_rate * sep.iso());
                };
            }
            return [cfg](double t, const DensityOperator& rho) {
                const HilbertDims& d = cfg.dims;
                Matrix iso = Matrix::Zero(d.total(), d.total());
                if (cfg.separation_target == 0 || cfg.separation_target == 1) {
                    const Matrix h1s =
                        partial_trace(cfg.triple.h1_at(t), 2, d) / static_cast<double>(d.d2);
                    const Propagator sep =
                        separation_propagator(HermitianOp(h1s), rho.reduced(1), cfg.z_constant);
                    iso += embed1(sep.iso(), d) / static_cast<double>(d.d2);
                }
                if (cfg.separation_target == 0 || cfg.separation_target == 2) {
                    const Matrix h2s =
                        partial_trace(cfg.triple.h2_at(t), 1, d) / static_cast<double>(d.d1);
                    const Propagator sep =
                        separation_propagator(HermitianOp(h2s), rho.reduced(2), cfg.z_constant);
                    iso += embed2(sep.iso(), d) / static_cast<double>(d.d1);
                }
                return Propagator::make_split(Matrix::Zero(d.total(), d.total()),
                                              cfg.separation_rate * iso);
            };
        case PolicyKind::reservoir:
            return [cfg](double t, const DensityOperator& rho) {
                const HilbertDims& d = cfg.dims;
                ReservoirSpec spec;
                spec.t_hr = cfg.t_hr.scalar_value(t);
                spec.tdot_hr = cfg.t_hr.scalar_rate(t);
                spec.h2 = HermitianOp(cfg.h2_sub_static);
                const Propagator ro2 = reservoir_propagator(spec, cfg.triple.h12_at(t), rho,
                                                            cfg.z_constant, cfg.consts);
                Matrix full = embed2(ro2.mat(), d) / static_cast<double>(d.d1);
                // The bipartite whole is isolated and the contact is inert:
                // the heat the reservoir absorbs comes out of sub-system 1
                // and the partition takes none. Complete the propagator on
                // factor 1 until Tr(H ro) and the non-inertness both vanish;
                // the completion is traceless on factor 1, so the reservoir
                // component ro^2 is untouched.
                const Matrix h1e = cfg.triple.h1_at(t);
                const Matrix h2e = cfg.triple.h2_at(t);
                const Matrix h12 = cfg.triple.h12_at(t);
                const Matrix h = h1e + h2e + h12;
                const Complex im(0.0, 1.0);
                const Matrix comm_sum =
                    (im / cfg.consts.hbar) * commutator(h1e + h2e, rho.mat());
                const double leak = real_trace_product(h, full);
                const double non_inert = real_trace_product(h12, full - comm_sum);
                const Matrix g_energy = partial_trace(h, 2, d) / static_cast<double>(d.d2);
                const Matrix g_inert = partial_trace(h12, 2, d) / static_cast<double>(d.d2);
                RealVector targets(2);
                targets << -leak, -non_inert;
                const Matrix comp = min_norm_traceless({g_energy, g_inert}, targets);
                full += embed1(comp, d) / static_cast<double>(d.d2);
                return Propagator::make_split(Matrix::Zero(d.total(), d.total()), full);
            };
        case PolicyKind::constrained:
            if (cfg.kind == SystemKind::undecomposed) {
                return [cfg](double t, const DensityOperator& rho) {
                    return constrained_exchange_propagator(
                        cfg.hamiltonian.at(t), rho, cfg.theta.scalar_value(t),
                        cfg.t_box.scalar_value(t), cfg.omega_ex, cfg.support);
                };
            }
            return [cfg](double t, const DensityOperator& rho) {
                return constrained_split_propagator(
                    cfg.triple.h1_at(t), cfg.triple.h2_at(t), cfg.triple.h12_at(t), rho,
                    cfg.temps_at(t), cfg.omega_ex, cfg.omega_int, cfg.consts, cfg.support);
            };
    }
    throw std::logic_error("build_policy: unknown policy");
}

// ---------------------------------------------------------------------------
// Run
// ---------------------------------------------------------------------------

fs::path resolve_out_dir(const ScenarioConfig& cfg) {
    if (!cfg.out_dir.empty()) return cfg.out_dir;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
    return fs::current_path();
}

void monitor_step(InvariantMonitor& mon, const ScenarioConfig& cfg, const ExchangeLedger& lg,
                  const Temperatures& temps) {
    const double t = lg.t;
    mon.residual("trace_unit", lg.trace_defect, tol::trace_unit, t);
    mon.residual("hermiticity", lg.herm_drift, 1e-10, t);
    mon.margin("positivity", lg.min_eigenvalue, cfg.abort_negativity, t);
    if (cfg.kind == SystemKind::bipartite) {
        const double scale =
            std::max({1.0, std::abs(lg.E1_dot), std::abs(lg.E2_dot), std::abs(lg.E12_dot),
                      std::abs(lg.W_ex), std::abs(lg.Q_ex)});
        mon.residual("first_law", lg.r_first_law / scale, 1e-9, t);
        mon.residual("heat_additivity", lg.r_heat_sum, 1e-10, t);
        mon.residual("external_heat_additivity", lg.r_heat_ex, 1e-10, t);
        mon.residual("internal_heat_balance", lg.r_heat_int, 1e-10, t);
        if (cfg.policy == PolicyKind::constrained) {
            mon.residual("internal_heat_zero", lg.Q_int, 1e-10, t);
            mon.residual("partition_exchange_zero", lg.Q12_ex, 1e-10, t);
        }
        mon.residual("split_traces", lg.r_split_trace, tol::propagator_trace, t);
        mon.residual("entropy_rate_compound", lg.r_entropy_rate_cd, 1e-10, t);
        mon.margin("subadditivity", lg.S_gap, tol::trace_unit, t);
        mon.margin("second_law_sigma1", lg.Sigma1, cfg.inequality_tol, t);
        mon.margin("second_law_sigma2", lg.Sigma2, cfg.inequality_tol, t);
        for (const InequalityResult& r : inequality_suite(lg, temps, cfg.inequality_tol)) {
            mon.margin("ineq_" + r.name, r.margin, cfg.inequality_tol, t, r.applicable);
        }
    } else {
        const double scale = std::max({1.0, std::abs(lg.E_dot), std::abs(lg.W_ex),
                                       std::abs(lg.Q_total)});
        mon.residual("first_law", lg.r_first_law / scale, 1e-9, t);
        mon.residual("split_traces", lg.r_split_trace, tol::propagator_trace, t);
        mon.margin("second_law_sigma", lg.Sigma, cfg.inequality_tol, t);
        mon.margin("defining_inequality", (1.0 / temps.theta - 1.0 / temps.t_box) * lg.Q_ex,
                   cfg.inequality_tol, t);
    }
}

}  // namespace

RunReport run(const ScenarioConfig& cfg) {
    RunReport report;
    report.name = cfg.name;
    const auto wall_start = std::chrono::steady_clock::now();

    const fs::path out_dir = resolve_out_dir(cfg);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    report.csv_path = out_dir / (cfg.basename + ".csv");
    report.report_path = out_dir / (cfg.basename + ".report.json");

    InvariantMonitor monitor;
    const PropagatorPolicy policy = build_policy(cfg);

    HamiltonianFn ham;
    if (cfg.kind == SystemKind::bipartite) {
        ham = [&cfg](double t) { return cfg.triple.total_at(t); };
    } else {
        ham = [&cfg](double t) { return cfg.hamiltonian.at(t); };
    }

    LedgerFn ledger_fn = [&](double t, const DensityOperator& rho, const Propagator& ro) {
        Temperatures temps = cfg.temps_at(t);
        ExchangeLedger lg;
        if (cfg.kind == SystemKind::bipartite) {
            if (cfg.temp_mode == TemperatureMode::extracted && ro.has_split()) {
                try {
                    const Matrix h = cfg.triple.total_at(t);
                    const ContactTemperature full =
                        contact_temperature(rho, h, ro.ex(), cfg.z_constant, cfg.consts);
                    if (full.positive) temps.theta = full.theta;
                    const ContactTemperature c1 = contact_temperature_sub(
                        rho, cfg.triple.h1_at(t), 1, ro.ex(), cfg.z_constant, cfg.consts);
                    if (c1.positive) temps.theta1 = c1.theta;
                    const ContactTemperature c2 = contact_temperature_sub(
                        rho, cfg.triple.h2_at(t), 2, ro.ex(), cfg.z_constant, cfg.consts);
                    if (c2.positive) temps.theta2 = c2.theta;
                } catch (const std::domain_error&) {
                    // extraction inadmissible at this step; keep prescribed values
                }
            }
            lg = compute_ledger(rho, cfg.triple, t, temps, ro, cfg.consts, cfg.z_constant,
                                cfg.partition_tol);
        } else {
            if (cfg.temp_mode == TemperatureMode::extracted && ro.has_split()) {
                try {
                    const ContactTemperature full = contact_temperature(
                        rho, cfg.hamiltonian.at(t), ro.ex(), cfg.z_constant, cfg.consts);
                    if (full.positive) temps.theta = full.theta;
                } catch (const std::domain_error&) {
                }
            }
            lg = compute_ledger_undecomposed(rho, cfg.hamiltonian, t, temps, ro, cfg.consts,
                                             cfg.z_constant);
        }
        // Z-sweep spot check of the entropy rate.
        const double s1 = entropy_rate(ro, rho, 0.1, cfg.consts);
        const double s10 = entropy_rate(ro, rho, 10.0, cfg.consts);
        monitor_step(monitor, cfg, lg, temps);
        monitor.residual("z_invariance", std::max(std::abs(s1 - lg.S_dot),
                                                  std::abs(s10 - lg.S_dot)),
                         1e-10, t);
        return lg;
    };

    EvolveOptions opt;
    opt.t0 = 0.0;
    opt.t_end = cfg.t_end;
    opt.dt = cfg.dt;
    opt.record_every = cfg.record_every;
    opt.record_states = false;
    opt.abort_negativity = cfg.abort_negativity;
    opt.consts = cfg.consts;

    Trajectory traj;
    try {
        traj = evolve(cfg.initial, ham, policy, opt, ledger_fn);
    } catch (const IntegrationError& e) {
        report.ok = false;
        report.error = e.what();
        report.invariants = monitor.summaries();
        return report;
    } catch (const std::exception& e) {
        report.ok = false;
        report.error = e.what();
        report.invariants = monitor.summaries();
        return report;
    }
    report.steps = traj.steps_taken;
    report.rows = static_cast<int>(traj.ledger.size());

    // Final-state equilibrium report.
    const double t_final = traj.times.back();
    const DensityOperator& rho_final = traj.final_state;
    const Propagator ro_final = policy(t_final, rho_final);
    const Temperatures temps_final = cfg.temps_at(t_final);
    try {
        if (cfg.kind == SystemKind::bipartite) {
            report.final_equilibrium =
                check_equilibrium_bipartite(rho_final, cfg.triple, t_final, ro_final,
                                            temps_final, cfg.z_constant, cfg.consts);
        } else {
            report.final_equilibrium = check_equilibrium_undecomposed(
                rho_final, cfg.hamiltonian.at(t_final), ro_final,
                cfg.hamiltonian.a.rate(t_final), temps_final.theta, temps_final.t_box,
                cfg.z_constant, cfg.consts);
        }
    } catch (const std::exception& e) {
        report.final_equilibrium = EquilibriumReport{};
        report.final_equilibrium.residuals["error"] = 0.0;
    }

    // Write the CSV from the recorded ledger rows.
    {
        std::ofstream csv(report.csv_path, std::ios::binary);
        if (!csv) {
            report.ok = false;
            report.error = "cannot write " + report.csv_path.string();
            return report;
        }
        const auto& fields = fields_for(cfg.kind);
        csv << "t";
        for (const auto& [name, ptr] : fields) csv << "," << name;
        csv << "\n";
        for (const ExchangeLedger& lg : traj.ledger) {
            csv << format_double(lg.t);
            for (const auto& [name, ptr] : fields) csv << "," << format_double(lg.*ptr);
            csv << "\n";
        }
    }

    report.invariants = monitor.summaries();
    report.ok = true;

    const auto wall_end = std::chrono::steady_clock::now();
    report.wall_seconds =
        std::chrono::duration_cast<std::chrono::duration<double>>(wall_end - wall_start).count();

    const ordered_json rj = report_to_json(report);
    std::ofstream rep_out(report.report_path, std::ios::binary);
    rep_out << rj.dump(2) << "\n";
    return report;
}

RunReport run_file(const std::string& path, const std::string& out_override) {
    ValidationResult vr = validate_file(path);
    if (!vr.ok()) {
        RunReport report;
        report.name = fs::path(path).stem().string();
        report.ok = false;
        std::string msg = "validation failed:";
        for (const auto& e : vr.errors) msg += " [" + e.path + "] " + e.message + ";";
        report.error = msg;
        return report;
    }
    if (!out_override.empty()) vr.config->out_dir = out_override;
    return run(*vr.config);
}

std::vector<RunReport> batch(const std::string& glob, int jobs,
                             const std::string& out_override) {
    // Wildcards are honored in the filename component only.
    const fs::path pattern(glob);
    const fs::path dir = pattern.parent_path().empty() ? fs::path(".") : pattern.parent_path();
    const std::string file_pat = pattern.filename().string();

    auto matches = [&](const std::string& name) {
        // Glob match with * and ? only.
        std::function<bool(std::size_t, std::size_t)> rec = [&](std::size_t pi,
                                                                std::size_t ni) -> bool {
            while (pi < file_pat.size()) {
                if (file_pat[pi] == '*') {
                    for (std::size_t skip = 0; ni + skip <= name.size(); ++skip) {
                        if (rec(pi + 1, ni + skip)) return true;
                    }
                    return false;
                }
                if (ni >= name.size()) return false;
                if (file_pat[pi] != '?' && file_pat[pi] != name[ni]) return false;
                ++pi;
                ++ni;
            }
            return ni == name.size();
        };
        return rec(0, 0);
    };

    std::vector<fs::path> files;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (entry.is_regular_file() && matches(entry.path().filename().string())) {
            files.push_back(entry.path());
        }
    }
    if (ec || files.empty()) {
        throw std::runtime_error("batch: no configs match \"" + glob + "\"");
    }
    std::sort(files.begin(), files.end());

    std::vector<RunReport> reports(files.size());
    const int n_jobs = std::max(1, jobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= files.size()) break;
            reports[i] = run_file(files[i].string(), out_override);
        }
    };
    if (n_jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < n_jobs; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return reports;
}

const std::vector<std::string>& csv_columns(SystemKind kind) {
    static const std::vector<std::string> bip = [] {
        std::vector<std::string> v;
        for (const auto& [name, ptr] : bipartite_fields()) v.emplace_back(name);
        return v;
    }();
    static const std::vector<std::string> und = [] {
        std::vector<std::string> v;
        for (const auto& [name, ptr] : undecomposed_fields()) v.emplace_back(name);
        return v;
    }();
    return kind == SystemKind::bipartite ? bip : und;
}

nlohmann::ordered_json report_to_json(const RunReport& report) {
    ordered_json j;
    j["schema"] = kReportSchemaVersion;
    j["scenario"] = report.name;
    j["ok"] = report.ok;
    if (!report.error.empty()) j["error"] = report.error;
    j["steps"] = report.steps;
    j["rows"] = report.rows;
    ordered_json inv = ordered_json::array();
    for (const auto& s : report.invariants) {
        ordered_json e;
        e["name"] = s.name;
        e["violations"] = s.violations;
        e["worst"] = s.worst;
        if (s.first_violation_time) {
            e["first_violation_time"] = *s.first_violation_time;
        } else {
            e["first_violation_time"] = nullptr;
        }
        inv.push_back(std::move(e));
    }
    j["invariants"] = std::move(inv);
    ordered_json eq;
    eq["sufficient"] = report.final_equilibrium.sufficient_ok;
    ordered_json nec = ordered_json::object();
    for (const auto& [k, v] : report.final_equilibrium.necessary_ok) nec[k] = v;
    ordered_json comp = ordered_json::object();
    for (const auto& [k, v] : report.final_equilibrium.complementary_ok) comp[k] = v;
    ordered_json res = ordered_json::object();
    for (const auto& [k, v] : report.final_equilibrium.residuals) res[k] = v;
    eq["necessary"] = std::move(nec);
    eq["complementary"] = std::move(comp);
    eq["residuals"] = std::move(res);
    j["final_equilibrium"] = std::move(eq);
    return j;
}

}  // namespace qtd::scenario
