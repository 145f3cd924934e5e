#include "qtd/propagator_models.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace qtd {

namespace {
const Complex kI(0.0, 1.0);

/// Hermitian part with the trace removed.
Matrix project_traceless_hermitian(const Matrix& o) {
    Matrix p = 0.5 * (o + o.adjoint());
    const int d = static_cast<int>(p.rows());
    p -= (p.trace() / static_cast<double>(d)) * Matrix::Identity(d, d);
    return p;
}

/// Solves the Gram system of the projected constraint operators; the
/// minimum-norm solution is a real combination of the projections.
Matrix min_norm_impl(const std::vector<Matrix>& projected, const RealVector& targets) {
    const int m = static_cast<int>(projected.size());
    if (m != targets.size()) {
        throw DimensionError("min_norm: constraint/target count mismatch");
    }
    if (m == 0) {
        throw std::invalid_argument("min_norm: no constraints given");
    }
    const int d = static_cast<int>(projected[0].rows());
    Eigen::MatrixXd gram(m, m);
    for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) {
            const double g = real_trace_product(projected[i], projected[j]);
            gram(i, j) = g;
            gram(j, i) = g;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const RealVector ev = es.eigenvalues();
    const double cutoff = std::max(ev.cwiseAbs().maxCoeff(), 1.0) * 1e-12;
    RealVector inv = RealVector::Zero(m);
    int rank = 0;
    for (int i = 0; i < m; ++i) {
        if (ev(i) > cutoff) {
            inv(i) = 1.0 / ev(i);
            ++rank;
        }
    }
    const RealVector lambda =
        es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose() * targets;
    const RealVector residual = gram * lambda - targets;
    const double scale = std::max(1.0, targets.cwiseAbs().maxCoeff());
    if (residual.cwiseAbs().maxCoeff() > 1e-9 * scale) {
        throw ConstraintError(
            "constraint system infeasible: residual " +
                std::to_string(residual.cwiseAbs().maxCoeff()) + " with Gram rank " +
                std::to_string(rank) + " of " + std::to_string(m) + " constraints",
            rank, m);
    }
    Matrix x = Matrix::Zero(d, d);
    for (int i = 0; i < m; ++i) x += lambda(i) * projected[i];
    return x;
}
}  // namespace

double ConstitutiveOmega::operator()(double x) const {
    if (kappa <= 0.0) {
        throw std::invalid_argument("ConstitutiveOmega: kappa must be positive");
    }
    switch (kind) {
        case Kind::linear:
            return kappa * x;
    }
    throw std::logic_error("ConstitutiveOmega: unknown kind");
}

double omega_eval(const ConstitutiveOmega& omega, double x) { return omega(x); }

void ReservoirSpec::validate() const {
    if (!(t_hr > 0.0)) {
        throw std::invalid_argument("ReservoirSpec: T_HR must be positive, got " +
                                    std::to_string(t_hr));
    }
    if (h2.dim() == 0) {
        throw std::invalid_argument("ReservoirSpec: reservoir Hamiltonian missing");
    }
}

Propagator separation_propagator(const HermitianOp& h_a, const DensityOperator& rho_a,
                                 double z) {
    if (h_a.dim() != rho_a.dim()) {
        throw DimensionError("separation_propagator: Hamiltonian/state dimension mismatch");
    }
    const Matrix logrho = log_scaled(rho_a.mat(), z);
    const Matrix ro = commutator(h_a.mat(), commutator(logrho, h_a.mat()));
    // Silent in the heat exchange, so it is all dissipative.
    return Propagator::make_split(Matrix::Zero(ro.rows(), ro.cols()), ro);
}

ReservoirRate reservoir_rate(const ReservoirSpec& spec, double z, const Constants& consts) {
    spec.validate();
    ReservoirRate out;
    const DensityOperator rho_hr = canonical(spec.h2, spec.t_hr, consts);
    const Matrix logrho = log_scaled(rho_hr.mat(), z);
    const double mean_log = real_trace_product(rho_hr.mat(), logrho);
    const int d = spec.h2.dim();
    const Matrix bracket = mean_log * Matrix::Identity(d, d) - logrho;
    out.c_op = rho_hr.mat() * bracket / spec.t_hr;
    out.c_op = 0.5 * (out.c_op + out.c_op.adjoint());
    out.rho_dot = out.c_op * spec.tdot_hr;
    return out;
}

Propagator reservoir_propagator(const ReservoirSpec& spec, const Matrix& h12,
                                const DensityOperator& rho_full, double z,
                                const Constants& consts) {
    const HilbertDims& dims = rho_full.dims();
    if (spec.h2.dim() != dims.d2) {
        throw DimensionError("reservoir_propagator: reservoir Hamiltonian must act on factor 2");
    }
    if (h12.rows() != dims.total()) {
        throw DimensionError("reservoir_propagator: interaction must live on the composite space");
    }
    const ReservoirRate rr = reservoir_rate(spec, z, consts);
    const Matrix traced = partial_trace(commutator(h12, rho_full.mat()), 1, dims);
    Matrix ro = (kI / consts.hbar) * traced + rr.c_op * spec.tdot_hr;
    ro = 0.5 * (ro + ro.adjoint());
    return Propagator::make(std::move(ro));
}

double reservoir_heat_capacity(const ReservoirSpec& spec, double z, const Constants& consts) {
    const ReservoirRate rr = reservoir_rate(spec, z, consts);
    return real_trace_product(spec.h2.mat(), rr.c_op);
}

Matrix min_norm_traceless(const std::vector<Matrix>& ops, const RealVector& targets) {
    std::vector<Matrix> projected;
    projected.reserve(ops.size());
    for (const auto& o : ops) projected.push_back(project_traceless_hermitian(o));
    return min_norm_impl(projected, targets);
}

Matrix min_norm_diagonal(const std::vector<Matrix>& ops, const RealVector& targets,
                         const Matrix& eigenbasis) {
    // Work with the diagonal (in the given basis) traceless part of each
    // constraint operator; the combination stays in the commutant.
    const int d = static_cast<int>(eigenbasis.rows());
    std::vector<Matrix> projected;
    projected.reserve(ops.size());
    for (const auto& o : ops) {
        const Matrix in_basis = eigenbasis.adjoint() * o * eigenbasis;
        RealVector diag(d);
        for (int i = 0; i < d; ++i) diag(i) = in_basis(i, i).real();
        diag.array() -= diag.mean();
        projected.push_back(eigenbasis * diag.cast<Complex>().asDiagonal() *
                            eigenbasis.adjoint());
    }
    return min_norm_impl(projected, targets);
}

namespace {
Matrix solve_constraints(const std::vector<Matrix>& ops, const RealVector& targets,
                         PropagatorSupport support, const DensityOperator& rho) {
    if (support == PropagatorSupport::full) {
        return min_norm_traceless(ops, targets);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.mat());
    return min_norm_diagonal(ops, targets, es.eigenvectors());
}
}  // namespace

Propagator constrained_split_propagator(const Matrix& h1e, const Matrix& h2e, const Matrix& h12,
                                        const DensityOperator& rho, const Temperatures& temps,
                                        const ConstitutiveOmega& omega_ex,
                                        const ConstitutiveOmega& omega_int,
                                        const Constants& consts, PropagatorSupport support) {
    temps.validate();
    const int d = rho.dim();
    if (h1e.rows() != d || h2e.rows() != d || h12.rows() != d) {
        throw DimensionError("constrained_split_propagator: operator dimensions mismatch");
    }

    // Exchange part: constitutive external heats, no exchange through the
    // partition.
    const double x1 = 1.0 / temps.theta1 - 1.0 / temps.t_box;
    const double x2 = 1.0 / temps.theta2 - 1.0 / temps.t_box;
    std::vector<Matrix> ex_ops{h1e, h2e, h12};
    RealVector ex_targets(3);
    ex_targets << omega_ex(x1), omega_ex(x2), 0.0;
    const Matrix ro_ex = solve_constraints(ex_ops, ex_targets, support, rho);

    // Iso part: constitutive internal heats against the replacement
    // temperatures, vanishing total internal heat.
    const Matrix h = h1e + h2e + h12;
    const double y1 = 1.0 / temps.theta1 - 1.0 / temps.t1;
    const double y2 = 1.0 / temps.theta2 - 1.0 / temps.t2;
    const Matrix comm12 = (kI / consts.hbar) * commutator(h12, rho.mat());
    const double shift1 = real_trace_product(h1e, comm12);
    const double shift2 = real_trace_product(h2e, comm12);
    std::vector<Matrix> iso_ops{h1e, h2e, h};
    RealVector iso_targets(3);
    iso_targets << omega_int(y1) + shift1, omega_int(y2) + shift2, 0.0;
    const Matrix ro_iso = solve_constraints(iso_ops, iso_targets, support, rho);

    return Propagator::make_split(ro_ex, ro_iso);
}

Propagator constrained_exchange_propagator(const Matrix& h, const DensityOperator& rho,
                                           double theta, double t_box,
                                           const ConstitutiveOmega& omega_ex,
                                           PropagatorSupport support) {
    if (!(theta > 0.0) || !(t_box > 0.0)) {
        throw std::invalid_argument("constrained_exchange_propagator: temperatures must be positive");
    }
    const double x = 1.0 / theta - 1.0 / t_box;
    std::vector<Matrix> ops{h};
    RealVector targets(1);
    targets << omega_ex(x);
    const Matrix ro_ex = solve_constraints(ops, targets, support, rho);
    return Propagator::make_split(ro_ex, Matrix::Zero(h.rows(), h.cols()));
}

}  // namespace qtd
