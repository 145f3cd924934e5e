#include "qtd/thermo.hpp"

#include <cmath>

namespace qtd {

namespace {
const Complex kI(0.0, 1.0);

Matrix embed_left_m(const Matrix& a, const HilbertDims& dims) {
    return kronecker(a, Matrix::Identity(dims.d2, dims.d2));
}

Matrix embed_right_m(const Matrix& b, const HilbertDims& dims) {
    return kronecker(Matrix::Identity(dims.d1, dims.d1), b);
}

std::vector<Matrix> zero_ops() { return {}; }
}  // namespace

HamiltonianTriple HamiltonianTriple::constant(const HilbertDims& dims, const Matrix& h1_sub,
                                              const Matrix& h2_sub, const Matrix& h12_comp) {
    return linear(dims, LinearBlock{h1_sub, {}, {}}, LinearBlock{h2_sub, {}, {}}, h12_comp, {},
                  Protocol{}, Protocol{}, Protocol{});
}

HamiltonianTriple HamiltonianTriple::linear(const HilbertDims& dims, LinearBlock b1,
                                            LinearBlock b2, Matrix h12_base,
                                            std::vector<Matrix> h12_couple, Protocol a1,
                                            Protocol a2, Protocol a12) {
    auto check_block = [&](const LinearBlock& b, int d, const Protocol& own,
                           const Protocol& shared, const char* which) {
        if (b.base.rows() != d) {
            throw DimensionError(std::string("HamiltonianTriple: ") + which + " base is " +
                                 std::to_string(b.base.rows()) + "x" +
                                 std::to_string(b.base.cols()) + ", expected dim " +
                                 std::to_string(d));
        }
        if (static_cast<int>(b.couple_own.size()) != own.size()) {
            throw DimensionError(std::string("HamiltonianTriple: ") + which + " has " +
                                 std::to_string(b.couple_own.size()) +
                                 " own couplings for a protocol of size " +
                                 std::to_string(own.size()));
        }
        if (static_cast<int>(b.couple_shared.size()) != shared.size()) {
            throw DimensionError(std::string("HamiltonianTriple: ") + which +
                                 " shared couplings do not match the shared protocol size");
        }
    };
    check_block(b1, dims.d1, a1, a12, "h1");
    check_block(b2, dims.d2, a2, a12, "h2");
    if (h12_base.rows() != dims.total()) {
        throw DimensionError("HamiltonianTriple: h12 base must live on the composite space");
    }
    if (static_cast<int>(h12_couple.size()) != a12.size()) {
        throw DimensionError("HamiltonianTriple: h12 couplings do not match the shared protocol");
    }

    HamiltonianTriple t;
    t.dims = dims;
    t.a1 = std::move(a1);
    t.a2 = std::move(a2);
    t.a12 = std::move(a12);

    auto embed_block_left = [dims](const LinearBlock& b) {
        LinearBlock e;
        e.base = embed_left_m(HermitianOp(b.base).mat(), dims);
        for (const auto& k : b.couple_own) e.couple_own.push_back(embed_left_m(HermitianOp(k).mat(), dims));
        for (const auto& k : b.couple_shared)
            e.couple_shared.push_back(embed_left_m(HermitianOp(k).mat(), dims));
        return e;
    };
    auto embed_block_right = [dims](const LinearBlock& b) {
        LinearBlock e;
        e.base = embed_right_m(HermitianOp(b.base).mat(), dims);
        for (const auto& k : b.couple_own) e.couple_own.push_back(embed_right_m(HermitianOp(k).mat(), dims));
        for (const auto& k : b.couple_shared)
            e.couple_shared.push_back(embed_right_m(HermitianOp(k).mat(), dims));
        return e;
    };

    auto eval_linear = [](const LinearBlock& b, const RealVector& own, const RealVector& shared) {
        Matrix h = b.base;
        for (Eigen::Index i = 0; i < own.size(); ++i) h += own(i) * b.couple_own[i];
        for (Eigen::Index j = 0; j < shared.size(); ++j) h += shared(j) * b.couple_shared[j];
        return h;
    };

    LinearBlock e1 = embed_block_left(b1);
    LinearBlock e2 = embed_block_right(b2);
    Matrix h12b = HermitianOp(std::move(h12_base)).mat();
    std::vector<Matrix> h12c;
    for (auto& k : h12_couple) h12c.push_back(HermitianOp(std::move(k)).mat());

    t.h1 = [e1, eval_linear](const RealVector& own, const RealVector& shared) {
        return eval_linear(e1, own, shared);
    };
    t.h2 = [e2, eval_linear](const RealVector& own, const RealVector& shared) {
        return eval_linear(e2, own, shared);
    };
    t.h12 = [h12b, h12c](const RealVector& shared) {
        Matrix h = h12b;
        for (Eigen::Index j = 0; j < shared.size(); ++j) h += shared(j) * h12c[j];
        return h;
    };
    t.dh1_da1 = [e1](const RealVector&, const RealVector&) { return e1.couple_own; };
    t.dh2_da2 = [e2](const RealVector&, const RealVector&) { return e2.couple_own; };
    t.dh1_da12 = [e1](const RealVector&, const RealVector&) { return e1.couple_shared; };
    t.dh2_da12 = [e2](const RealVector&, const RealVector&) { return e2.couple_shared; };
    t.dh12_da12 = [h12c](const RealVector&) { return h12c; };
    return t;
}

HamiltonianProtocol HamiltonianProtocol::constant(const Matrix& h0) {
    return linear(h0, {}, Protocol{});
}

HamiltonianProtocol HamiltonianProtocol::linear(Matrix base, std::vector<Matrix> couple,
                                                Protocol a) {
    if (static_cast<int>(couple.size()) != a.size()) {
        throw DimensionError("HamiltonianProtocol: couplings do not match the protocol size");
    }
    HamiltonianProtocol hp;
    hp.a = std::move(a);
    Matrix b = HermitianOp(std::move(base)).mat();
    std::vector<Matrix> c;
    for (auto& k : couple) c.push_back(HermitianOp(std::move(k)).mat());
    hp.h = [b, c](const RealVector& av) {
        Matrix h = b;
        for (Eigen::Index i = 0; i < av.size(); ++i) h += av(i) * c[i];
        return h;
    };
    hp.dh_da = [c](const RealVector&) { return c; };
    return hp;
}

void Temperatures::validate() const {
    auto pos = [](double v, const char* name) {
        if (!(v > 0.0)) {
            throw std::invalid_argument(std::string("Temperatures: ") + name +
                                        " must be positive, got " + std::to_string(v));
        }
    };
    pos(theta, "theta");
    pos(theta1, "theta1");
    pos(theta2, "theta2");
    pos(t_box, "t_box");
    pos(t1, "t1");
    pos(t2, "t2");
    if (t12) pos(*t12, "t12");
    if (theta12) pos(*theta12, "theta12");
}

double energy(const DensityOperator& rho, const Matrix& h) {
    return real_trace_product(h, rho.mat());
}

PowerExchanges power_exchanges(const DensityOperator& rho, const HamiltonianTriple& triple,
                               double t) {
    PowerExchanges out;
    const RealVector a1 = triple.a1.value(t), a2 = triple.a2.value(t), a12 = triple.a12.value(t);
    const RealVector a1d = triple.a1.rate(t), a2d = triple.a2.rate(t), a12d = triple.a12.rate(t);

    auto dot = [&](const std::vector<Matrix>& ops, const RealVector& rates) {
        double s = 0.0;
        for (std::size_t i = 0; i < ops.size(); ++i) {
            s += real_trace_product(ops[i], rho.mat()) * rates(static_cast<Eigen::Index>(i));
        }
        return s;
    };

    out.w1_ex = dot(triple.dh1_da1 ? triple.dh1_da1(a1, a12) : zero_ops(), a1d);
    out.w2_ex = dot(triple.dh2_da2 ? triple.dh2_da2(a2, a12) : zero_ops(), a2d);
    out.w1_int = dot(triple.dh1_da12 ? triple.dh1_da12(a1, a12) : zero_ops(), a12d);
    out.w2_int = dot(triple.dh2_da12 ? triple.dh2_da12(a2, a12) : zero_ops(), a12d);
    out.w12_int = dot(triple.dh12_da12 ? triple.dh12_da12(a12) : zero_ops(), a12d);
    return out;
}

HeatExchanges heat_exchanges(const DensityOperator& rho, const Matrix& h1e, const Matrix& h2e,
                             const Matrix& h12, const Propagator& ro, const Constants& consts) {
    if (!ro.has_split()) {
        throw std::logic_error("heat_exchanges: propagator carries no ex/iso split");
    }
    HeatExchanges q;
    const Matrix h = h1e + h2e + h12;
    const Matrix comm12 = (kI / consts.hbar) * commutator(h12, rho.mat());
    const Matrix comm_sum = (kI / consts.hbar) * commutator(h1e + h2e, rho.mat());
    const Matrix modified = ro.mat() - comm12;

    q.q1 = real_trace_product(h1e, modified);
    q.q2 = real_trace_product(h2e, modified);
    q.q12 = real_trace_product(h12, ro.mat() - comm_sum);
    q.q_total = real_trace_product(h, ro.mat());

    q.q1_ex = real_trace_product(h1e, ro.ex());
    q.q2_ex = real_trace_product(h2e, ro.ex());
    q.q12_ex = real_trace_product(h12, ro.ex());
    q.q_ex = real_trace_product(h, ro.ex());

    q.q1_int = real_trace_product(h1e, ro.iso() - comm12);
    q.q2_int = real_trace_product(h2e, ro.iso() - comm12);
    q.q12_int = real_trace_product(h12, ro.iso() - comm_sum);
    q.q_int = real_trace_product(h, ro.iso());
    return q;
}

EntropyRates entropy_rates(const DensityOperator& rho, const Propagator& ro, const Matrix& h12,
                           double z, const Constants& consts) {
    EntropyRates out;
    const HilbertDims& d = rho.dims();
    const Matrix l_full = log_scaled(rho.mat(), z);
    const Matrix l1 = embed_left_m(log_scaled(rho.reduced(1).mat(), z), d);
    const Matrix l2 = embed_right_m(log_scaled(rho.reduced(2).mat(), z), d);
    const Matrix comm12 = (kI / consts.hbar) * commutator(h12, rho.mat());
    const Matrix modified = ro.mat() - comm12;

    out.s_dot = -consts.k_B * real_trace_product(ro.mat(), l_full);
    out.s1_dot = -consts.k_B * real_trace_product(modified, l1);
    out.s2_dot = -consts.k_B * real_trace_product(modified, l2);
    if (ro.has_split()) {
        out.s1_dot_ex = -consts.k_B * real_trace_product(ro.ex(), l1);
        out.s2_dot_ex = -consts.k_B * real_trace_product(ro.ex(), l2);
        out.s1_dot_int = -consts.k_B * real_trace_product(ro.iso() - comm12, l1);
        out.s2_dot_int = -consts.k_B * real_trace_product(ro.iso() - comm12, l2);
    }
    return out;
}

EntropyExchanges entropy_exchanges(const HeatExchanges& heats, const Temperatures& temps) {
    temps.validate();
    EntropyExchanges xi;
    xi.xi1_ex = heats.q1_ex / temps.theta1;
    xi.xi2_ex = heats.q2_ex / temps.theta2;
    xi.xi1_int = heats.q1_int / temps.theta1;
    xi.xi2_int = heats.q2_int / temps.theta2;
    xi.xi_box = -heats.q_ex / temps.t_box;
    return xi;
}

EntropyProductions entropy_production(const DensityOperator& rho, const Matrix& h1e,
                                      const Matrix& h2e, const Matrix& h12,
                                      const Temperatures& temps, const Propagator& ro, double z,
                                      const Constants& consts) {
    temps.validate();
    EntropyProductions out;
    const HilbertDims& d = rho.dims();
    const Matrix l1 = embed_left_m(log_scaled(rho.reduced(1).mat(), z), d);
    const Matrix l2 = embed_right_m(log_scaled(rho.reduced(2).mat(), z), d);
    const Matrix bracket1 = h1e / temps.theta1 + consts.k_B * l1;
    const Matrix bracket2 = h2e / temps.theta2 + consts.k_B * l2;
    const Matrix comm12 = (kI / consts.hbar) * commutator(h12, rho.mat());
    const Matrix modified = ro.mat() - comm12;
    out.sigma1 = -real_trace_product(bracket1, modified);
    out.sigma2 = -real_trace_product(bracket2, modified);
    out.sigma1_oqu = real_trace_product(bracket1, comm12);
    out.sigma2_oqu = real_trace_product(bracket2, comm12);
    return out;
}

ContactTemperature contact_temperature(const DensityOperator& rho, const Matrix& h,
                                       const Matrix& ro_ex, double z, const Constants& consts) {
    const double denom = real_trace_product(h, ro_ex);
    if (std::abs(denom) <= 1e-12) {
        throw std::domain_error("contact_temperature: Tr(H ro_ex) = " + std::to_string(denom) +
                                " too close to zero (needs a nonvanishing exchange propagator)");
    }
    ContactTemperature out;
    const Matrix l = log_scaled(rho.mat(), z);
    out.inverse = -consts.k_B * real_trace_product(l, ro_ex) / denom;
    out.positive = out.inverse > 0.0;
    out.theta = out.positive ? 1.0 / out.inverse : 0.0;
    return out;
}

ContactTemperature contact_temperature_sub(const DensityOperator& rho, const Matrix& h_a_embedded,
                                           int subsystem, const Matrix& ro_ex, double z,
                                           const Constants& consts) {
    const HilbertDims& d = rho.dims();
    const Matrix l_sub = log_scaled(rho.reduced(subsystem).mat(), z);
    const Matrix l = (subsystem == 1) ? embed_left_m(l_sub, d) : embed_right_m(l_sub, d);
    const double denom = real_trace_product(h_a_embedded, ro_ex);
    if (std::abs(denom) <= 1e-12) {
        throw std::domain_error("contact_temperature_sub: Tr(H^A ro_ex) too close to zero");
    }
    ContactTemperature out;
    out.inverse = -consts.k_B * real_trace_product(l, ro_ex) / denom;
    out.positive = out.inverse > 0.0;
    out.theta = out.positive ? 1.0 / out.inverse : 0.0;
    return out;
}

UndecomposedSigma entropy_production_undecomposed(const DensityOperator& rho, const Matrix& h,
                                                  double theta, const Propagator& ro, double z,
                                                  const Constants& consts) {
    UndecomposedSigma out;
    const Matrix l = log_scaled(rho.mat(), z);
    const Matrix bracket = h / theta + consts.k_B * l;
    out.bracket_form = -real_trace_product(bracket, ro.mat());
    if (ro.has_split()) {
        out.iso_form = -consts.k_B * real_trace_product(ro.iso(), l);
    }
    return out;
}

Matrix hamiltonian_compound_deficiency(const Matrix& h, const Matrix& h1e, const Matrix& h2e) {
    return h - h1e - h2e;
}

double entropy_compound_deficiency(const DensityOperator& rho, const Constants& consts) {
    return -partial_entropies(rho, consts).gap;
}

double entropy_rate_compound_deficiency(const EntropyRates& rates) {
    return rates.s_dot - rates.s1_dot - rates.s2_dot;
}

double entropy_rate_compound_deficiency_direct(const DensityOperator& rho, const Propagator& ro,
                                               const Matrix& h12, double z,
                                               const Constants& consts) {
    const HilbertDims& d = rho.dims();
    const Matrix l_full = log_scaled(rho.mat(), z);
    const Matrix l_prod = embed_left_m(log_scaled(rho.reduced(1).mat(), z), d) +
                          embed_right_m(log_scaled(rho.reduced(2).mat(), z), d);
    const Matrix modified = ro.mat() - (kI / consts.hbar) * commutator(h12, rho.mat());
    // S_dot - S1_dot - S2_dot in closed form.
    return consts.k_B *
           (real_trace_product(modified, l_prod) - real_trace_product(ro.mat(), l_full));
}

double energy_rate_compound_deficiency(const ExchangeLedger& ledger) {
    return ledger.E_dot - ledger.E1_dot - ledger.E2_dot;
}

PartitionClass classify_partition(const HeatExchanges& heats, const Temperatures& temps,
                                  double tolerance) {
    PartitionClass c;
    c.inertness = std::abs(heats.q12_int) <= tolerance ? Inertness::inert : Inertness::non_inert;
    c.sheet = std::abs(temps.t1 - temps.t2) <= tolerance ? SheetKind::mono_sheet
                                                         : SheetKind::double_sheet;
    return c;
}

FirstLawRates first_law_rates(const PowerExchanges& power, const HeatExchanges& heats) {
    FirstLawRates out;
    out.e1_dot = power.w1_ex + power.w1_int + heats.q1_ex + heats.q1_int;
    out.e2_dot = power.w2_ex + power.w2_int + heats.q2_ex + heats.q2_int;
    out.e12_dot = power.w12_int + heats.q12_int;
    out.residual = out.e1_dot + out.e2_dot + out.e12_dot - power.w_ex() - heats.q_ex;
    return out;
}

std::vector<InequalityResult> inequality_suite(const ExchangeLedger& lg,
                                               const Temperatures& temps, double tolerance) {
    temps.validate();
    std::vector<InequalityResult> out;
    auto add = [&](const std::string& name, double lhs, double rhs, bool applicable = true) {
        InequalityResult r;
        r.name = name;
        r.lhs = lhs;
        r.rhs = rhs;
        r.margin = lhs - rhs;
        r.applicable = applicable;
        r.satisfied = !applicable || r.margin >= -tolerance;
        out.push_back(std::move(r));
    };

    const double inv_th = 1.0 / temps.theta, inv_box = 1.0 / temps.t_box;
    const double inv1 = 1.0 / temps.theta1, inv2 = 1.0 / temps.theta2;
    const double invt1 = 1.0 / temps.t1, invt2 = 1.0 / temps.t2;

    add("defining_undecomposed", (inv_th - inv_box) * lg.Q_ex, 0.0);
    add("defining_sub1_external", (inv1 - inv_box) * lg.Q1_ex, 0.0);
    add("defining_sub2_external", (inv2 - inv_box) * lg.Q2_ex, 0.0);
    add("defining_sub1_internal", (inv1 - invt1) * lg.Q1_int, 0.0);
    add("defining_sub2_internal", (inv2 - invt2) * lg.Q2_int, 0.0);
    add("compound_external", lg.Q1_ex * inv1 + lg.Q2_ex * inv2 - lg.Q_ex * inv_box, 0.0);
    add("theta_ordering", (inv1 - inv_th) * (inv_th - inv2), 0.0);
    add("du7_at_theta1", (inv2 - inv1) * lg.Q_ex, 0.0,
        std::abs(temps.t_box - temps.theta1) <= tolerance);
    add("du7_at_theta2", (inv1 - inv2) * lg.Q_ex, 0.0,
        std::abs(temps.t_box - temps.theta2) <= tolerance);

    add("external_entropy_compound", lg.Xi1_ex + lg.Xi2_ex + lg.Xi_box, 0.0);
    add("internal_pair",
        2.0 * (lg.Q1_int * inv1 + lg.Q2_int * inv2),
        (invt1 - invt2) * (lg.Q1_int - lg.Q2_int) - (invt1 + invt2) * lg.Q12_int);
    add("internal_entropy_compound", lg.Xi1_int + lg.Xi2_int,
        0.5 * (invt1 - invt2) * (lg.Q1_int - lg.Q2_int) -
            0.5 * (invt1 + invt2) * lg.Q12_int);

    const bool inert = lg.inert_flag > 0.5;
    const bool mono = lg.mono_sheet_flag > 0.5;
    const double t12 = temps.t12.value_or(temps.t1);
    const double inv12 = 1.0 / t12;
    const bool equal_theta = std::abs(temps.theta1 - temps.theta2) <= tolerance;
    const double theta12 = temps.theta12.value_or(temps.theta1);

    add("mono_sheet_internal", lg.Q1_int * inv1 + lg.Q2_int * inv2, -inv12 * lg.Q12_int, mono);
    add("mono_sheet_entropy", lg.Xi1_int + lg.Xi2_int, -inv12 * lg.Q12_int, mono);
    add("equal_theta_internal", 0.0,
        (invt1 - invt2) * (lg.Q1_int - lg.Q2_int) +
            (2.0 / theta12 - invt1 - invt2) * lg.Q12_int,
        equal_theta);
    add("partition_reservoir", (inv12 - 1.0 / theta12) * lg.Q12_int, 0.0, mono && equal_theta);

    add("inert_double_sheet_1", (invt2 - invt1) * lg.Q1_int, 0.0, inert && !mono);
    add("inert_double_sheet_2", (invt1 - invt2) * lg.Q2_int, 0.0, inert && !mono);
    add("inert_double_entropy", lg.Xi1_int + lg.Xi2_int, (invt1 - invt2) * lg.Q1_int,
        inert && !mono);

    add("inert_mono_sheet_1", (inv1 - inv2) * lg.Q1_int, 0.0, inert && mono);
    add("inert_mono_sheet_2", (inv2 - inv1) * lg.Q2_int, 0.0, inert && mono);
    add("inert_mono_sum", (inv1 - inv12) * lg.Q1_int + (inv2 - inv12) * lg.Q2_int, 0.0,
        inert && mono);
    add("inert_mono_entropy", lg.Xi1_int + lg.Xi2_int, 0.0, inert && mono);

    add("inert_contact_heat", (inv2 - inv1) * lg.Q2, 0.0,
        inert && mono && std::abs(lg.Q_ex) <= tolerance);

    return out;
}

namespace {
void fill_temperature_fields(ExchangeLedger& lg, const Temperatures& temps) {
    lg.theta = temps.theta;
    lg.theta1 = temps.theta1;
    lg.theta2 = temps.theta2;
    lg.t_box = temps.t_box;
    lg.t1 = temps.t1;
    lg.t2 = temps.t2;
}

void fill_state_diagnostics(ExchangeLedger& lg, const DensityOperator& rho) {
    lg.trace_defect = std::abs(rho.mat().trace() - Complex(1.0, 0.0));
    lg.herm_drift = rho.hermiticity_defect();
    lg.min_eigenvalue = hermitian_eigenvalues(rho.mat()).minCoeff();
}
}  // namespace

ExchangeLedger compute_ledger(const DensityOperator& rho, const HamiltonianTriple& triple,
                              double t, const Temperatures& temps, const Propagator& ro,
                              const Constants& consts, double z, double partition_tol) {
    temps.validate();
    ExchangeLedger lg;
    lg.t = t;

    const Matrix h1e = triple.h1_at(t);
    const Matrix h2e = triple.h2_at(t);
    const Matrix h12 = triple.h12_at(t);
    const Matrix h = h1e + h2e + h12;

    lg.E = energy(rho, h);
    lg.E1 = energy(rho, h1e);
    lg.E2 = energy(rho, h2e);
    lg.E12 = energy(rho, h12);

    const PowerExchanges pw = power_exchanges(rho, triple, t);
    lg.W1_ex = pw.w1_ex;
    lg.W2_ex = pw.w2_ex;
    lg.W_ex = pw.w_ex();
    lg.W1_int = pw.w1_int;
    lg.W2_int = pw.w2_int;
    lg.W12_int = pw.w12_int;
    lg.W_int_sum = pw.internal_sum();

    const HeatExchanges q = heat_exchanges(rho, h1e, h2e, h12, ro, consts);
    lg.Q1 = q.q1;
    lg.Q2 = q.q2;
    lg.Q12 = q.q12;
    lg.Q_total = q.q_total;
    lg.Q1_ex = q.q1_ex;
    lg.Q2_ex = q.q2_ex;
    lg.Q12_ex = q.q12_ex;
    lg.Q_ex = q.q_ex;
    lg.Q1_int = q.q1_int;
    lg.Q2_int = q.q2_int;
    lg.Q12_int = q.q12_int;
    lg.Q_int = q.q_int;

    const FirstLawRates fl = first_law_rates(pw, q);
    lg.E1_dot = fl.e1_dot;
    lg.E2_dot = fl.e2_dot;
    lg.E12_dot = fl.e12_dot;
    lg.E_dot = pw.w_ex() + pw.internal_sum() + q.q_total;
    lg.r_first_law = fl.residual;

    lg.S = shannon_entropy(rho, consts);
    const PartialEntropies pe = partial_entropies(rho, consts);
    lg.S1 = pe.s1;
    lg.S2 = pe.s2;
    lg.S_gap = pe.gap;

    const EntropyRates sr = entropy_rates(rho, ro, h12, z, consts);
    lg.S_dot = sr.s_dot;
    lg.S1_dot = sr.s1_dot;
    lg.S2_dot = sr.s2_dot;
    lg.S1_dot_ex = sr.s1_dot_ex;
    lg.S1_dot_int = sr.s1_dot_int;
    lg.S2_dot_ex = sr.s2_dot_ex;
    lg.S2_dot_int = sr.s2_dot_int;

    const EntropyExchanges xi = entropy_exchanges(q, temps);
    lg.Xi = q.q_total / temps.theta;
    lg.Xi1_ex = xi.xi1_ex;
    lg.Xi2_ex = xi.xi2_ex;
    lg.Xi1_int = xi.xi1_int;
    lg.Xi2_int = xi.xi2_int;
    lg.Xi_box = xi.xi_box;

    const HilbertDims& d = rho.dims();
    const Matrix l1 = embed_left_m(log_scaled(rho.reduced(1).mat(), z), d);
    const Matrix l2 = embed_right_m(log_scaled(rho.reduced(2).mat(), z), d);
    const Matrix comm12 = (kI / consts.hbar) * commutator(h12, rho.mat());
    const Matrix modified = ro.mat() - comm12;
    const Matrix bracket1 = h1e / temps.theta1 + consts.k_B * l1;
    const Matrix bracket2 = h2e / temps.theta2 + consts.k_B * l2;
    lg.Sigma1 = -real_trace_product(bracket1, modified);
    lg.Sigma2 = -real_trace_product(bracket2, modified);
    lg.Sigma1_oqu = real_trace_product(bracket1, comm12);
    lg.Sigma2_oqu = real_trace_product(bracket2, comm12);

    const UndecomposedSigma us =
        entropy_production_undecomposed(rho, h, temps.theta, ro, z, consts);
    lg.Sigma = us.bracket_form;
    lg.Sigma_iso_form = us.iso_form;
    lg.Sigma_form_gap = us.gap();

    fill_temperature_fields(lg, temps);
    try {
        const ContactTemperature ct = contact_temperature(rho, h, ro.ex(), z, consts);
        lg.theta_extracted = ct.positive ? ct.theta : 0.0;
        lg.theta_extracted_ok = ct.positive ? 1.0 : 0.0;
    } catch (const std::domain_error&) {
        lg.theta_extracted_ok = 0.0;
    }
    try {
        const ContactTemperature ct = contact_temperature_sub(rho, h1e, 1, ro.ex(), z, consts);
        lg.theta1_extracted = ct.positive ? ct.theta : 0.0;
        lg.theta1_extracted_ok = ct.positive ? 1.0 : 0.0;
    } catch (const std::domain_error&) {
        lg.theta1_extracted_ok = 0.0;
    }
    try {
        const ContactTemperature ct = contact_temperature_sub(rho, h2e, 2, ro.ex(), z, consts);
        lg.theta2_extracted = ct.positive ? ct.theta : 0.0;
        lg.theta2_extracted_ok = ct.positive ? 1.0 : 0.0;
    } catch (const std::domain_error&) {
        lg.theta2_extracted_ok = 0.0;
    }

    lg.r_heat_sum = q.q1 + q.q2 + q.q12 - q.q_total;
    lg.r_heat_ex = q.q1_ex + q.q2_ex - q.q_ex;
    lg.r_heat_int = q.q1_int + q.q2_int + q.q12_int - q.q_int;
    lg.r_split_trace = std::max({std::abs(ro.mat().trace()), std::abs(ro.ex().trace()),
                                 std::abs(ro.iso().trace())});
    lg.r_entropy_rate_cd =
        entropy_rate_compound_deficiency(sr) -
        entropy_rate_compound_deficiency_direct(rho, ro, h12, z, consts);

    const Matrix rho_dot = -(kI / consts.hbar) * commutator(h, rho.mat()) + ro.mat();
    lg.inert_constraint = real_trace_product(h12, rho_dot);

    const PartitionClass pc = classify_partition(q, temps, partition_tol);
    lg.inert_flag = pc.inertness == Inertness::inert ? 1.0 : 0.0;
    lg.mono_sheet_flag = pc.sheet == SheetKind::mono_sheet ? 1.0 : 0.0;

    fill_state_diagnostics(lg, rho);
    return lg;
}

ExchangeLedger compute_ledger_undecomposed(const DensityOperator& rho,
                                           const HamiltonianProtocol& ham, double t,
                                           const Temperatures& temps, const Propagator& ro,
                                           const Constants& consts, double z) {
    temps.validate();
    ExchangeLedger lg;
    lg.t = t;

    const Matrix h = ham.at(t);
    lg.E = energy(rho, h);

    const RealVector av = ham.a.value(t);
    const RealVector ad = ham.a.rate(t);
    double w = 0.0;
    if (ham.dh_da) {
        const std::vector<Matrix> grads = ham.dh_da(av);
        for (std::size_t i = 0; i < grads.size(); ++i) {
            w += real_trace_product(grads[i], rho.mat()) * ad(static_cast<Eigen::Index>(i));
        }
    }
    lg.W_ex = w;

    lg.Q_total = real_trace_product(h, ro.mat());
    if (ro.has_split()) {
        lg.Q_ex = real_trace_product(h, ro.ex());
        lg.Q_int = real_trace_product(h, ro.iso());
    }

    lg.S = shannon_entropy(rho, consts);
    lg.S_dot = -consts.k_B * real_trace_product(ro.mat(), log_scaled(rho.mat(), z));
    lg.Xi = lg.Q_total / temps.theta;

    const UndecomposedSigma us =
        entropy_production_undecomposed(rho, h, temps.theta, ro, z, consts);
    lg.Sigma = us.bracket_form;
    lg.Sigma_iso_form = us.iso_form;
    lg.Sigma_form_gap = us.gap();

    lg.E_dot = w + lg.Q_total;
    lg.r_first_law = lg.E_dot - lg.W_ex - lg.Q_total;

    fill_temperature_fields(lg, temps);
    if (ro.has_split()) {
        try {
            const ContactTemperature ct = contact_temperature(rho, h, ro.ex(), z, consts);
            lg.theta_extracted = ct.positive ? ct.theta : 0.0;
            lg.theta_extracted_ok = ct.positive ? 1.0 : 0.0;
        } catch (const std::domain_error&) {
            lg.theta_extracted_ok = 0.0;
        }
        lg.r_split_trace = std::max({std::abs(ro.mat().trace()), std::abs(ro.ex().trace()),
                                     std::abs(ro.iso().trace())});
    } else {
        lg.r_split_trace = std::abs(ro.mat().trace());
    }

    fill_state_diagnostics(lg, rho);
    return lg;
}

}  // namespace qtd
