#include "qtd/dynamics.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace qtd {

namespace {
const Complex kI(0.0, 1.0);
}

Matrix rhs_full(const DensityOperator& rho, const Matrix& h, const Propagator& ro,
                const Constants& consts) {
    if (h.rows() != rho.dim() || ro.dim() != rho.dim()) {
        throw DimensionError("rhs_full: dimension mismatch");
    }
    return -(kI / consts.hbar) * commutator(h, rho.mat()) + ro.mat();
}

Matrix modified_propagator(const DensityOperator& rho, const Matrix& h12, const Propagator& ro,
                           const Constants& consts) {
    return -(kI / consts.hbar) * commutator(h12, rho.mat()) + ro.mat();
}

TracedRhs rhs_traced(const DensityOperator& rho, const Matrix& h1e, const Matrix& h2e,
                     const Matrix& h12, const Propagator& ro, const Constants& consts) {
    const HilbertDims& d = rho.dims();
    if (h1e.rows() != d.total() || h2e.rows() != d.total() || h12.rows() != d.total()) {
        throw DimensionError("rhs_traced: operators must live on the composite space");
    }
    TracedRhs out;
    const Matrix rho1 = rho.reduced(1).mat();
    const Matrix rho2 = rho.reduced(2).mat();
    const Matrix h1_sub = partial_trace(h1e, 2, d) / static_cast<double>(d.d2);
    const Matrix h2_sub = partial_trace(h2e, 1, d) / static_cast<double>(d.d1);
    const Matrix comm12 = commutator(h12, rho.mat());
    const Matrix ro1 = partial_trace(ro.mat(), 2, d);
    const Matrix ro2 = partial_trace(ro.mat(), 1, d);
    out.rho1_dot = -(kI / consts.hbar) * commutator(h1_sub, rho1) -
                   (kI / consts.hbar) * partial_trace(comm12, 2, d) + ro1;
    out.rho2_dot = -(kI / consts.hbar) * commutator(h2_sub, rho2) -
                   (kI / consts.hbar) * partial_trace(comm12, 1, d) + ro2;
    return out;
}

namespace {
struct ProjectionResult {
    Matrix rho;
    double min_eigenvalue;
};

ProjectionResult project_state(const Matrix& m, double abort_negativity, double t, int step) {
    Matrix sym = 0.5 * (m + m.adjoint());
    const double tr = sym.trace().real();
    if (!std::isfinite(tr) || !sym.allFinite()) {
        throw IntegrationError("evolve: non-finite state at t=" + std::to_string(t), t, step,
                               0.0);
    }
    sym /= tr;
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    RealVector lam = es.eigenvalues();
    const double min_eig = lam.minCoeff();
    if (min_eig < -abort_negativity) {
        throw IntegrationError("evolve: positivity breach at t=" + std::to_string(t) +
                                   ", most negative eigenvalue " + std::to_string(min_eig),
                               t, step, min_eig);
    }
    if (min_eig < 0.0) {
        lam = lam.cwiseMax(0.0);
        lam /= lam.sum();
        sym = es.eigenvectors() * lam.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
    }
    return {std::move(sym), min_eig};
}
}  // namespace

Trajectory evolve(const DensityOperator& initial, const HamiltonianFn& hamiltonian,
                  const PropagatorPolicy& policy, const EvolveOptions& opt,
                  const LedgerFn& ledger_fn) {
    if (!(opt.dt > 0.0)) {
        throw std::invalid_argument("evolve: dt must be positive");
    }
    if (opt.t_end < opt.t0) {
        throw std::invalid_argument("evolve: t_end before t0");
    }
    const std::optional<HilbertDims> dims =
        initial.bipartite() ? std::optional<HilbertDims>(initial.dims()) : std::nullopt;

    const auto n_steps = static_cast<long>(std::llround((opt.t_end - opt.t0) / opt.dt));

    Trajectory traj;
    traj.min_eigenvalue_seen = hermitian_eigenvalues(initial.mat()).minCoeff();

    auto eval_ro = [&](double t, const Matrix& rho_m) {
        DensityOperator stage = DensityOperator::unchecked(rho_m, dims);
        return policy ? policy(t, stage) : Propagator::zero(static_cast<int>(rho_m.rows()));
    };
    auto deriv = [&](double t, const Matrix& rho_m) {
        const Matrix h = hamiltonian(t);
        const Propagator ro = eval_ro(t, rho_m);
        return (-(kI / opt.consts.hbar) * commutator(h, rho_m) + ro.mat()).eval();
    };

    auto record = [&](double t, const Matrix& rho_m) {
        DensityOperator rho = DensityOperator::unchecked(rho_m, dims);
        const Propagator ro = eval_ro(t, rho_m);
        traj.times.push_back(t);
        if (opt.record_states) traj.states.push_back(rho);
        traj.propagators.push_back(ro);
        if (ledger_fn) traj.ledger.push_back(ledger_fn(t, rho, ro));
    };

    Matrix rho = initial.mat();
    record(opt.t0, rho);

    for (long step = 0; step < n_steps; ++step) {
        const double t = opt.t0 + static_cast<double>(step) * opt.dt;
        const double h = opt.dt;

        const Matrix k1 = deriv(t, rho);
        const Matrix k2 = deriv(t + 0.5 * h, rho + 0.5 * h * k1);
        const Matrix k3 = deriv(t + 0.5 * h, rho + 0.5 * h * k2);
        const Matrix k4 = deriv(t + h, rho + h * k3);
        Matrix next = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        const double herm_drift = 0.5 * (next - next.adjoint()).cwiseAbs().maxCoeff();
        const double trace_defect = std::abs(next.trace() - Complex(1.0, 0.0));
        traj.max_hermiticity_drift = std::max(traj.max_hermiticity_drift, herm_drift);
        traj.max_trace_defect = std::max(traj.max_trace_defect, trace_defect);

        ProjectionResult pr =
            project_state(next, opt.abort_negativity, t + h, static_cast<int>(step));
        traj.min_eigenvalue_seen = std::min(traj.min_eigenvalue_seen, pr.min_eigenvalue);
        rho = std::move(pr.rho);
        ++traj.steps_taken;

        if ((step + 1) % opt.record_every == 0 || step + 1 == n_steps) {
            record(opt.t0 + static_cast<double>(step + 1) * opt.dt, rho);
        }
    }
    traj.final_state = DensityOperator::unchecked(rho, dims);
    return traj;
}

}  // namespace qtd
