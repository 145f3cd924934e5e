#include "qtd/equilibrium.hpp"

#include <cmath>

namespace qtd {

namespace {
const Complex kI(0.0, 1.0);

double fro(const Matrix& m) { return m.norm(); }

/// Norm of the traceless part; canonical brackets are only defined up to an
/// additive multiple of the identity (the admissible Z rescaling).
double traceless_norm(const Matrix& m) {
    const int d = static_cast<int>(m.rows());
    return fro(m - (m.trace() / static_cast<double>(d)) * Matrix::Identity(d, d));
}
}  // namespace

bool EquilibriumReport::all_necessary() const {
    for (const auto& [name, ok] : necessary_ok) {
        if (!ok) return false;
    }
    return true;
}

EquilibriumReport check_equilibrium_undecomposed(const DensityOperator& rho, const Matrix& h,
                                                 const Propagator& ro, const RealVector& a_dot,
                                                 double theta, double t_box, double z,
                                                 const Constants& consts,
                                                 const EquilibriumTolerances& tol) {
    EquilibriumReport rep;
    auto necessary = [&](const std::string& name, double residual, double bound) {
        rep.residuals[name] = residual;
        rep.necessary_ok[name] = std::abs(residual) <= bound;
    };
    auto complementary = [&](const std::string& name, double residual, double bound) {
        rep.residuals[name] = residual;
        rep.complementary_ok[name] = std::abs(residual) <= bound;
    };

    const Matrix rho_dot = -(kI / consts.hbar) * commutator(h, rho.mat()) + ro.mat();
    necessary("rho_dot", fro(rho_dot), tol.operator_residual);
    necessary("propagator", fro(ro.mat()), tol.operator_residual);
    if (ro.has_split()) {
        necessary("propagator_iso", fro(ro.iso()), tol.operator_residual);
    }
    necessary("protocol_static", a_dot.size() ? a_dot.cwiseAbs().maxCoeff() : 0.0,
              tol.scalar_rate);
    necessary("theta_equals_environment", theta - t_box, tol.operator_residual);

    complementary("commutator", fro(commutator(h, rho.mat())), tol.operator_residual);
    if (ro.has_split()) {
        complementary("propagator_ex", fro(ro.ex()), tol.operator_residual);
    }
    const Matrix logrho = log_scaled(rho.mat(), z);
    const double q_dot = real_trace_product(h, ro.mat());
    const double s_dot = -consts.k_B * real_trace_product(ro.mat(), logrho);
    complementary("heat_rate", q_dot, tol.scalar_rate);
    complementary("entropy_rate", s_dot, tol.scalar_rate);
    complementary("entropy_exchange", q_dot / theta, tol.scalar_rate);
    const Matrix bracket = h / theta + consts.k_B * logrho;
    complementary("entropy_production", -real_trace_product(bracket, ro.mat()), tol.scalar_rate);

    const double bracket_res = traceless_norm(bracket);
    rep.residuals["canonical_bracket"] = bracket_res;
    const bool canonical_ok = bracket_res <= tol.operator_residual;
    const bool ro_zero = fro(ro.mat()) <= tol.operator_residual;
    rep.sufficient_ok = canonical_ok && ro_zero && rep.all_necessary();
    return rep;
}

EquilibriumReport check_equilibrium_bipartite(const DensityOperator& rho,
                                              const HamiltonianTriple& triple, double t,
                                              const Propagator& ro, const Temperatures& temps,
                                              double z, const Constants& consts,
                                              const EquilibriumTolerances& tol) {
    temps.validate();
    EquilibriumReport rep;
    auto necessary = [&](const std::string& name, double residual, double bound) {
        rep.residuals[name] = residual;
        rep.necessary_ok[name] = std::abs(residual) <= bound;
    };
    auto complementary = [&](const std::string& name, double residual, double bound) {
        rep.residuals[name] = residual;
        rep.complementary_ok[name] = std::abs(residual) <= bound;
    };

    const HilbertDims& d = rho.dims();
    const Matrix h1e = triple.h1_at(t);
    const Matrix h2e = triple.h2_at(t);
    const Matrix h12 = triple.h12_at(t);

    const RealVector a12_dot = triple.a12.rate(t);
    double rate_max = a12_dot.size() ? a12_dot.cwiseAbs().maxCoeff() : 0.0;
    const RealVector a1_dot = triple.a1.rate(t);
    const RealVector a2_dot = triple.a2.rate(t);
    if (a1_dot.size()) rate_max = std::max(rate_max, a1_dot.cwiseAbs().maxCoeff());
    if (a2_dot.size()) rate_max = std::max(rate_max, a2_dot.cwiseAbs().maxCoeff());
    necessary("protocol_static", rate_max, tol.scalar_rate);

    const EntropyProductions sig =
        entropy_production(rho, h1e, h2e, h12, temps, ro, z, consts);
    necessary("sigma1", sig.sigma1, tol.scalar_rate);
    necessary("sigma2", sig.sigma2, tol.scalar_rate);

    const TracedRhs traced = rhs_traced(rho, h1e, h2e, h12, ro, consts);
    necessary("rho1_dot", fro(traced.rho1_dot), tol.operator_residual);
    necessary("rho2_dot", fro(traced.rho2_dot), tol.operator_residual);

    const Matrix ro1 = partial_trace(ro.mat(), 2, d);
    const Matrix ro2 = partial_trace(ro.mat(), 1, d);
    necessary("propagator1", fro(ro1), tol.operator_residual);
    necessary("propagator2", fro(ro2), tol.operator_residual);

    const Matrix comm12 = commutator(h12, rho.mat());
    necessary("interaction_traced1", fro(partial_trace(comm12, 2, d)), tol.operator_residual);
    necessary("interaction_traced2", fro(partial_trace(comm12, 1, d)), tol.operator_residual);

    const HeatExchanges q = ro.has_split()
                                ? heat_exchanges(rho, h1e, h2e, h12, ro, consts)
                                : heat_exchanges(rho, h1e, h2e, h12,
                                                 Propagator::make_split(
                                                     Matrix::Zero(rho.dim(), rho.dim()), ro.mat()),
                                                 consts);
    necessary("heat1", q.q1, tol.scalar_rate);
    necessary("heat2", q.q2, tol.scalar_rate);

    const EntropyRates sr = entropy_rates(rho, ro, h12, z, consts);
    necessary("entropy_rate1", sr.s1_dot, tol.scalar_rate);
    necessary("entropy_rate2", sr.s2_dot, tol.scalar_rate);
    necessary("xi1", q.q1 / temps.theta1, tol.scalar_rate);
    necessary("xi2", q.q2 / temps.theta2, tol.scalar_rate);

    necessary("temperature_equalized", temps.theta1 - temps.theta2, tol.operator_residual);

    // Supplementary pair: each alone silences the entropy production, both
    // together (plus vanishing traced propagators) give equilibrium.
    complementary("supplementary_propagator1",
                  fro(ro1 - (kI / consts.hbar) * partial_trace(comm12, 2, d)),
                  tol.operator_residual);
    complementary("supplementary_propagator2",
                  fro(ro2 - (kI / consts.hbar) * partial_trace(comm12, 1, d)),
                  tol.operator_residual);

    const Matrix rho1 = rho.reduced(1).mat();
    const Matrix rho2 = rho.reduced(2).mat();
    const Matrix h1_sub = partial_trace(h1e, 2, d) / static_cast<double>(d.d2);
    const Matrix h2_sub = partial_trace(h2e, 1, d) / static_cast<double>(d.d1);
    const double canonical1 =
        traceless_norm(h1_sub / temps.theta1 + consts.k_B * log_scaled(rho1, z));
    const double canonical2 =
        traceless_norm(h2_sub / temps.theta2 + consts.k_B * log_scaled(rho2, z));
    complementary("canonical1", canonical1, tol.operator_residual);
    complementary("canonical2", canonical2, tol.operator_residual);

    complementary("commutator1", fro(commutator(h1_sub, rho1)), tol.operator_residual);
    complementary("commutator2", fro(commutator(h2_sub, rho2)), tol.operator_residual);

    // Modified propagator of the traced equations vanishes at equilibrium.
    complementary("modified_propagator1",
                  fro(-(kI / consts.hbar) * partial_trace(comm12, 2, d) + ro1),
                  tol.operator_residual);
    complementary("modified_propagator2",
                  fro(-(kI / consts.hbar) * partial_trace(comm12, 1, d) + ro2),
                  tol.operator_residual);

    // Full-trace commutator identity replacing the undecomposed commutation
    // condition.
    complementary("trace_commutator", std::abs(comm12.trace()), tol.scalar_rate);

    // Inert-contact pair: no power and no heat through the partition.
    double w12 = 0.0;
    if (triple.dh12_da12) {
        const std::vector<Matrix> grads = triple.dh12_da12(triple.a12.value(t));
        for (std::size_t i = 0; i < grads.size(); ++i) {
            w12 += real_trace_product(grads[i], rho.mat()) *
                   a12_dot(static_cast<Eigen::Index>(i));
        }
    }
    complementary("inert_contact_power", w12, tol.scalar_rate);
    complementary("inert_contact_heat", q.q12, tol.scalar_rate);

    rep.sufficient_ok = rep.all_necessary() &&
                        rep.complementary_ok.at("canonical1") &&
                        rep.complementary_ok.at("canonical2");
    return rep;
}

}  // namespace qtd
