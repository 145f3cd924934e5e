#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qtd/dynamics.hpp"
#include "qtd/equilibrium.hpp"
#include "qtd/propagator_models.hpp"
#include "qtd/scenario.hpp"

namespace py = pybind11;
using namespace qtd;

namespace {

std::optional<HilbertDims> dims_from(py::object dims) {
    if (dims.is_none()) return std::nullopt;
    auto pair = dims.cast<std::pair<int, int>>();
    return HilbertDims(pair.first, pair.second);
}

}  // namespace

PYBIND11_MODULE(_qtdsim, m) {
    m.doc() = "Density-operator quantum thermodynamics: modified von Neumann dynamics, "
              "propagator models and exchange bookkeeping";

    py::register_exception<ConstraintError>(m, "ConstraintError", PyExc_RuntimeError);

    py::class_<Constants>(m, "Constants")
        .def(py::init<>())
        .def(py::init([](double k_B, double hbar) {
                 return Constants{k_B, hbar};
             }),
             py::arg("k_B") = 1.0, py::arg("hbar") = 1.0)
        .def_readwrite("k_B", &Constants::k_B)
        .def_readwrite("hbar", &Constants::hbar);

    py::class_<HilbertDims>(m, "HilbertDims")
        .def(py::init<int, int>(), py::arg("d1"), py::arg("d2"))
        .def_readonly("d1", &HilbertDims::d1)
        .def_readonly("d2", &HilbertDims::d2)
        .def_property_readonly("total", &HilbertDims::total);

    py::class_<HermitianOp>(m, "HermitianOp")
        .def(py::init<Matrix>())
        .def_property_readonly("matrix", &HermitianOp::mat)
        .def_property_readonly("dim", &HermitianOp::dim)
        .def_property_readonly("hermiticity_defect", &HermitianOp::hermiticity_defect);

    py::class_<DensityOperator>(m, "DensityOperator")
        .def_static(
            "make",
            [](const Matrix& mat, py::object dims) {
                return DensityOperator::make(mat, dims_from(dims));
            },
            py::arg("matrix"), py::arg("dims") = py::none())
        .def_property_readonly("matrix", &DensityOperator::mat)
        .def_property_readonly("dim", &DensityOperator::dim)
        .def_property_readonly("bipartite", &DensityOperator::bipartite)
        .def("reduced", &DensityOperator::reduced, py::arg("keep"));

    py::class_<Propagator>(m, "Propagator")
        .def_static("zero", &Propagator::zero, py::arg("dim"))
        .def_static("make", &Propagator::make, py::arg("matrix"))
        .def_static("make_split", &Propagator::make_split, py::arg("ex"), py::arg("iso"))
        .def_property_readonly("matrix", &Propagator::mat)
        .def_property_readonly("has_split", &Propagator::has_split)
        .def_property_readonly("ex", [](const Propagator& p) { return p.ex(); })
        .def_property_readonly("iso", [](const Propagator& p) { return p.iso(); });

    // operator algebra
    m.def("embed_left", &embed_left, py::arg("op"), py::arg("dims"));
    m.def("embed_right", &embed_right, py::arg("op"), py::arg("dims"));
    m.def("kronecker", &kronecker, py::arg("a"), py::arg("b"));
    m.def(
        "partial_trace",
        [](const Matrix& a, int over, const HilbertDims& dims) {
            return partial_trace(a, over, dims);
        },
        py::arg("matrix"), py::arg("over"), py::arg("dims"));
    m.def("commutator", &commutator, py::arg("a"), py::arg("b"));
    m.def("mat_exp_hermitian",
          [](const Matrix& a) { return mat_exp_hermitian(HermitianOp(a)).mat(); });
    m.def(
        "mat_log_regularized",
        [](const Matrix& a, double eps) { return mat_log_regularized(a, eps).mat(); },
        py::arg("matrix"), py::arg("eps") = tol::log_clamp_operator);

    // states and entropy
    m.def(
        "from_weights",
        [](const Matrix& basis, const RealVector& p, py::object dims) {
            return from_weights(basis, p, dims_from(dims));
        },
        py::arg("basis"), py::arg("p"), py::arg("dims") = py::none());
    m.def(
        "canonical",
        [](const Matrix& h, double theta, const Constants& c) {
            return canonical(HermitianOp(h), theta, c);
        },
        py::arg("h"), py::arg("theta"), py::arg("constants") = Constants{});
    m.def("microcanonical", &microcanonical, py::arg("dim"));
    m.def("shannon_entropy", &shannon_entropy, py::arg("rho"),
          py::arg("constants") = Constants{});
    m.def(
        "partial_entropies",
        [](const DensityOperator& rho, const Constants& c) {
            const PartialEntropies pe = partial_entropies(rho, c);
            return py::make_tuple(pe.s1, pe.s2, pe.gap);
        },
        py::arg("rho"), py::arg("constants") = Constants{});
    m.def("entropy_rate", &entropy_rate, py::arg("ro"), py::arg("rho"), py::arg("z") = 1.0,
          py::arg("constants") = Constants{});

    // propagator models
    m.def(
        "separation_propagator",
        [](const Matrix& h, const DensityOperator& rho, double z) {
            return separation_propagator(HermitianOp(h), rho, z);
        },
        py::arg("h"), py::arg("rho"), py::arg("z") = 1.0);
    m.def(
        "reservoir_rate",
        [](const Matrix& h2, double t_hr, double tdot_hr, double z, const Constants& c) {
            ReservoirSpec spec{t_hr, tdot_hr, HermitianOp(h2)};
            const ReservoirRate rr = reservoir_rate(spec, z, c);
            return py::make_tuple(rr.rho_dot, rr.c_op);
        },
        py::arg("h2"), py::arg("t_hr"), py::arg("tdot_hr"), py::arg("z") = 1.0,
        py::arg("constants") = Constants{});
    m.def(
        "reservoir_propagator",
        [](const Matrix& h2, double t_hr, double tdot_hr, const Matrix& h12,
           const DensityOperator& rho_full, double z, const Constants& c) {
            ReservoirSpec spec{t_hr, tdot_hr, HermitianOp(h2)};
            return reservoir_propagator(spec, h12, rho_full, z, c);
        },
        py::arg("h2"), py::arg("t_hr"), py::arg("tdot_hr"), py::arg("h12"), py::arg("rho_full"),
        py::arg("z") = 1.0, py::arg("constants") = Constants{});
    m.def("min_norm_traceless", &min_norm_traceless, py::arg("ops"), py::arg("targets"));

    py::class_<Temperatures>(m, "Temperatures")
        .def(py::init<>())
        .def_readwrite("theta", &Temperatures::theta)
        .def_readwrite("theta1", &Temperatures::theta1)
        .def_readwrite("theta2", &Temperatures::theta2)
        .def_readwrite("t_box", &Temperatures::t_box)
        .def_readwrite("t1", &Temperatures::t1)
        .def_readwrite("t2", &Temperatures::t2);

    m.def(
        "constrained_split_propagator",
        [](const Matrix& h1e, const Matrix& h2e, const Matrix& h12, const DensityOperator& rho,
           const Temperatures& temps, double kappa_ex, double kappa_int, const Constants& c,
           bool diagonal) {
            ConstitutiveOmega ox{ConstitutiveOmega::Kind::linear, kappa_ex,
                                 ConstitutiveOmega::Channel::external};
            ConstitutiveOmega oi{ConstitutiveOmega::Kind::linear, kappa_int,
                                 ConstitutiveOmega::Channel::internal};
            return constrained_split_propagator(
                h1e, h2e, h12, rho, temps, ox, oi, c,
                diagonal ? PropagatorSupport::diagonal : PropagatorSupport::full);
        },
        py::arg("h1e"), py::arg("h2e"), py::arg("h12"), py::arg("rho"), py::arg("temps"),
        py::arg("kappa_ex") = 1.0, py::arg("kappa_int") = 1.0,
        py::arg("constants") = Constants{}, py::arg("diagonal") = false);

    // dynamics
    m.def(
        "rhs_full",
        [](const DensityOperator& rho, const Matrix& h, const Propagator& ro,
           const Constants& c) { return rhs_full(rho, h, ro, c); },
        py::arg("rho"), py::arg("h"), py::arg("ro"), py::arg("constants") = Constants{});
    m.def(
        "evolve_constant",
        [](const DensityOperator& initial, const Matrix& h, const Propagator& ro, double t_end,
           double dt, const Constants& c) {
            EvolveOptions opt;
            opt.t_end = t_end;
            opt.dt = dt;
            opt.consts = c;
            Trajectory traj = evolve(
                initial, [&h](double) { return h; },
                [&ro](double, const DensityOperator&) { return ro; }, opt);
            py::list states;
            for (const auto& s : traj.states) states.append(s.mat());
            return py::make_tuple(traj.times, states, traj.final_state);
        },
        py::arg("initial"), py::arg("h"), py::arg("ro"), py::arg("t_end"), py::arg("dt"),
        py::arg("constants") = Constants{},
        "Fixed-Hamiltonian, fixed-propagator RK4 evolution");

    // thermo
    m.def(
        "heat_exchanges",
        [](const DensityOperator& rho, const Matrix& h1e, const Matrix& h2e, const Matrix& h12,
           const Propagator& ro, const Constants& c) {
            const HeatExchanges q = heat_exchanges(rho, h1e, h2e, h12, ro, c);
            py::dict d;
            d["q1"] = q.q1;
            d["q2"] = q.q2;
            d["q12"] = q.q12;
            d["q_total"] = q.q_total;
            d["q1_ex"] = q.q1_ex;
            d["q2_ex"] = q.q2_ex;
            d["q12_ex"] = q.q12_ex;
            d["q_ex"] = q.q_ex;
            d["q1_int"] = q.q1_int;
            d["q2_int"] = q.q2_int;
            d["q12_int"] = q.q12_int;
            d["q_int"] = q.q_int;
            return d;
        },
        py::arg("rho"), py::arg("h1e"), py::arg("h2e"), py::arg("h12"), py::arg("ro"),
        py::arg("constants") = Constants{});
    m.def(
        "entropy_rates",
        [](const DensityOperator& rho, const Propagator& ro, const Matrix& h12, double z,
           const Constants& c) {
            const EntropyRates r = entropy_rates(rho, ro, h12, z, c);
            py::dict d;
            d["s_dot"] = r.s_dot;
            d["s1_dot"] = r.s1_dot;
            d["s2_dot"] = r.s2_dot;
            d["s1_dot_ex"] = r.s1_dot_ex;
            d["s1_dot_int"] = r.s1_dot_int;
            d["s2_dot_ex"] = r.s2_dot_ex;
            d["s2_dot_int"] = r.s2_dot_int;
            return d;
        },
        py::arg("rho"), py::arg("ro"), py::arg("h12"), py::arg("z") = 1.0,
        py::arg("constants") = Constants{});
    m.def(
        "check_equilibrium_undecomposed",
        [](const DensityOperator& rho, const Matrix& h, const Propagator& ro,
           const RealVector& a_dot, double theta, double t_box, double z, const Constants& c) {
            const EquilibriumReport rep =
                check_equilibrium_undecomposed(rho, h, ro, a_dot, theta, t_box, z, c);
            py::dict d;
            d["sufficient"] = rep.sufficient_ok;
            d["necessary"] = rep.necessary_ok;
            d["complementary"] = rep.complementary_ok;
            d["residuals"] = rep.residuals;
            return d;
        },
        py::arg("rho"), py::arg("h"), py::arg("ro"), py::arg("a_dot"), py::arg("theta"),
        py::arg("t_box"), py::arg("z") = 1.0, py::arg("constants") = Constants{});
    m.def(
        "contact_temperature",
        [](const DensityOperator& rho, const Matrix& h, const Matrix& ro_ex, double z,
           const Constants& c) {
            const ContactTemperature ct = contact_temperature(rho, h, ro_ex, z, c);
            return py::make_tuple(ct.theta, ct.inverse, ct.positive);
        },
        py::arg("rho"), py::arg("h"), py::arg("ro_ex"), py::arg("z") = 1.0,
        py::arg("constants") = Constants{});

    // scenario interface
    auto sc = m.def_submodule("scenario", "Config-driven scenario runner");
    sc.def("validate_file", [](const std::string& path) {
        const auto result = qtd::scenario::validate_file(path);
        py::list errors;
        for (const auto& e : result.errors) {
            errors.append(py::make_tuple(e.path, e.message));
        }
        return py::make_tuple(result.ok(), errors);
    });
    sc.def(
        "run_file",
        [](const std::string& path, const std::string& out_dir) {
            const auto report = qtd::scenario::run_file(path, out_dir);
            py::dict d;
            d["name"] = report.name;
            d["ok"] = report.ok;
            d["error"] = report.error;
            d["steps"] = report.steps;
            d["rows"] = report.rows;
            d["csv_path"] = report.csv_path.string();
            d["report_path"] = report.report_path.string();
            return d;
        },
        py::arg("path"), py::arg("out_dir") = "");
}
