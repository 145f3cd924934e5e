#pragma once

#include <map>

#include "qtd/dynamics.hpp"

namespace qtd {

struct EquilibriumTolerances {
    double operator_residual = 1e-9;  // Frobenius norms
    double scalar_rate = 1e-10;
};

/// Layered verdict mirroring the necessary / complementary / sufficient
/// partition of the equilibrium conditions, with the raw residuals kept for
/// reporting.
struct EquilibriumReport {
    std::map<std::string, bool> necessary_ok;
    std::map<std::string, bool> complementary_ok;
    bool sufficient_ok = false;
    std::map<std::string, double> residuals;

    bool all_necessary() const;
};

/// Undecomposed system: stationary state, vanishing propagator and protocol,
/// the complementary exchange conditions, and the canonical-bracket
/// sufficiency test (which also pins the contact temperature to the
/// environment temperature).
EquilibriumReport check_equilibrium_undecomposed(const DensityOperator& rho, const Matrix& h,
                                                 const Propagator& ro, const RealVector& a_dot,
                                                 double theta, double t_box, double z = 1.0,
                                                 const Constants& consts = {},
                                                 const EquilibriumTolerances& tol = {});

/// Bipartite system at time t: endoreversible equilibrium conditions on the
/// reduced states, the supplementary propagator/canonical pair, exchange
/// silence, and temperature equalization.
EquilibriumReport check_equilibrium_bipartite(const DensityOperator& rho,
                                              const HamiltonianTriple& triple, double t,
                                              const Propagator& ro, const Temperatures& temps,
                                              double z = 1.0, const Constants& consts = {},
                                              const EquilibriumTolerances& tol = {});

}  // namespace qtd
