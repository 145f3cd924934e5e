#pragma once

#include "qtd/thermo.hpp"

namespace qtd {

/// -(i/hbar)[H, rho] + ro. Hermitian and traceless.
Matrix rhs_full(const DensityOperator& rho, const Matrix& h, const Propagator& ro,
                const Constants& consts = {});

/// The propagator-like object -(i/hbar)[H12, rho] + ro entering the traced
/// equations of motion, and its traced components.
Matrix modified_propagator(const DensityOperator& rho, const Matrix& h12, const Propagator& ro,
                           const Constants& consts = {});

struct TracedRhs {
    Matrix rho1_dot;  // on the sub-space of factor 1
    Matrix rho2_dot;
};
/// Equations of motion of the reduced states, driven by the full state.
TracedRhs rhs_traced(const DensityOperator& rho, const Matrix& h1e, const Matrix& h2e,
                     const Matrix& h12, const Propagator& ro, const Constants& consts = {});

using HamiltonianFn = std::function<Matrix(double t)>;
using PropagatorPolicy = std::function<Propagator(double t, const DensityOperator& rho)>;

struct EvolveOptions {
    double t0 = 0.0;
    double t_end = 1.0;
    double dt = 1e-3;
    int record_every = 1;      // sample stride for the trajectory arrays
    bool record_states = true;
    /// Eigenvalues below -abort_negativity abort the run; negatives within
    /// [-abort_negativity, 0) are projected to zero and the state renormalized.
    double abort_negativity = 1e-8;
    Constants consts{};
};

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityOperator> states;
    std::vector<Propagator> propagators;
    std::vector<ExchangeLedger> ledger;  // filled when a ledger callback is given

    DensityOperator final_state;  // kept even when states are not recorded
    int steps_taken = 0;
    double max_hermiticity_drift = 0.0;
    double max_trace_defect = 0.0;
    double min_eigenvalue_seen = 0.0;
};

struct IntegrationError : std::runtime_error {
    double t;
    int step;
    double worst_eigenvalue;
    IntegrationError(const std::string& msg, double t_, int step_, double worst)
        : std::runtime_error(msg), t(t_), step(step_), worst_eigenvalue(worst) {}
};

using LedgerFn = std::function<ExchangeLedger(double t, const DensityOperator& rho,
                                              const Propagator& ro)>;

/// Fixed-step RK4 on the matrix equation of motion. After every step the
/// state is symmetrized, trace-renormalized and eigenvalue-projected; drifts
/// beyond tolerance abort with the offending time and eigenvalue.
Trajectory evolve(const DensityOperator& initial, const HamiltonianFn& hamiltonian,
                  const PropagatorPolicy& policy, const EvolveOptions& opt,
                  const LedgerFn& ledger_fn = {});

}  // namespace qtd
