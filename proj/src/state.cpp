#include "qtd/state.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace qtd {

namespace {
void check_dims_consistent(const Matrix& m, const std::optional<HilbertDims>& dims) {
    if (dims && dims->total() != m.rows()) {
        throw DimensionError("DensityOperator: matrix dim " + std::to_string(m.rows()) +
                             " does not match d1*d2=" + std::to_string(dims->total()));
    }
}
}  // namespace

DensityOperator DensityOperator::make(Matrix m, std::optional<HilbertDims> dims) {
    check_dims_consistent(m, dims);
    DensityOperator rho;
    rho.op_ = HermitianOp(std::move(m));
    rho.dims_ = dims;
    const double tr_defect = std::abs(rho.op_.mat().trace() - Complex(1.0, 0.0));
    if (tr_defect > tol::trace_unit) {
        throw std::invalid_argument("DensityOperator: |Tr - 1| = " + std::to_string(tr_defect) +
                                    " exceeds tolerance");
    }
    const double min_eig = hermitian_eigenvalues(rho.op_.mat()).minCoeff();
    if (min_eig < -tol::psd) {
        throw std::invalid_argument("DensityOperator: eigenvalue " + std::to_string(min_eig) +
                                    " below PSD tolerance");
    }
    return rho;
}

DensityOperator DensityOperator::unchecked(Matrix m, std::optional<HilbertDims> dims) {
    check_dims_consistent(m, dims);
    DensityOperator rho;
    rho.op_ = HermitianOp(std::move(m));
    rho.dims_ = dims;
    return rho;
}

const HilbertDims& DensityOperator::dims() const {
    if (!dims_) {
        throw std::logic_error("DensityOperator: bipartite dims requested on undecomposed state");
    }
    return *dims_;
}

DensityOperator DensityOperator::reduced(int keep) const {
    const HilbertDims& d = dims();
    if (keep != 1 && keep != 2) {
        throw std::invalid_argument("DensityOperator::reduced: keep must be 1 or 2");
    }
    return DensityOperator::unchecked(partial_trace(mat(), keep == 1 ? 2 : 1, d));
}

Propagator Propagator::zero(int dim) {
    return make_split(Matrix::Zero(dim, dim), Matrix::Zero(dim, dim));
}

Propagator Propagator::make(Matrix m) {
    Propagator ro;
    ro.op_ = HermitianOp(std::move(m));
    const double tr = std::abs(ro.op_.mat().trace());
    if (tr > tol::propagator_trace) {
        throw std::invalid_argument("Propagator: |Tr| = " + std::to_string(tr) +
                                    " exceeds tolerance (must be traceless)");
    }
    return ro;
}

Propagator Propagator::make_split(Matrix ex, Matrix iso) {
    if (ex.rows() != iso.rows() || ex.cols() != iso.cols()) {
        throw DimensionError("Propagator: ex/iso dimension mismatch");
    }
    Propagator ro = make(ex + iso);
    ro.ex_ = HermitianOp(std::move(ex)).mat();
    ro.iso_ = HermitianOp(std::move(iso)).mat();
    const double defect = (ro.ex_ + ro.iso_ - ro.op_.mat()).cwiseAbs().maxCoeff();
    if (defect > tol::split_sum) {
        throw std::invalid_argument("Propagator: ex + iso differs from total by " +
                                    std::to_string(defect));
    }
    ro.has_split_ = true;
    return ro;
}

const Matrix& Propagator::ex() const {
    if (!has_split_) throw std::logic_error("Propagator: no ex/iso split available");
    return ex_;
}

const Matrix& Propagator::iso() const {
    if (!has_split_) throw std::logic_error("Propagator: no ex/iso split available");
    return iso_;
}

namespace {
void check_orthonormal(const Matrix& basis) {
    const Matrix gram = basis.adjoint() * basis;
    const double defect =
        (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    if (defect > 1e-10) {
        throw std::invalid_argument("basis not orthonormal: Gram deviation " +
                                    std::to_string(defect));
    }
}
}  // namespace

DensityOperator from_weights(const Matrix& basis, const RealVector& p,
                             std::optional<HilbertDims> dims) {
    if (basis.cols() != p.size()) {
        throw DimensionError("from_weights: basis/weight count mismatch");
    }
    check_orthonormal(basis);
    double sum = 0.0;
    for (Eigen::Index j = 0; j < p.size(); ++j) {
        if (p(j) < -1e-12 || p(j) > 1.0 + 1e-12) {
            throw std::invalid_argument("from_weights: weight out of [0,1]: " +
                                        std::to_string(p(j)));
        }
        sum += p(j);
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw std::invalid_argument("from_weights: weights sum to " + std::to_string(sum));
    }
    Matrix rho = basis * p.cast<Complex>().asDiagonal() * basis.adjoint();
    return DensityOperator::make(std::move(rho), dims);
}

Propagator propagator_from_weight_rates(const Matrix& basis, const RealVector& p_dot) {
    if (basis.cols() != p_dot.size()) {
        throw DimensionError("propagator_from_weight_rates: basis/rate count mismatch");
    }
    check_orthonormal(basis);
    if (std::abs(p_dot.sum()) > 1e-12) {
        throw std::invalid_argument("propagator_from_weight_rates: rates sum to " +
                                    std::to_string(p_dot.sum()) + ", must vanish");
    }
    Matrix ro = basis * p_dot.cast<Complex>().asDiagonal() * basis.adjoint();
    return Propagator::make(std::move(ro));
}

DensityOperator canonical(const HermitianOp& h, double theta, const Constants& consts) {
    if (theta <= 0.0) {
        throw std::invalid_argument("canonical: temperature must be positive, got " +
                                    std::to_string(theta));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.mat());
    RealVector lam = es.eigenvalues();
    // Shift by the ground energy before exponentiating to avoid overflow.
    RealVector w = (-(lam.array() - lam.minCoeff()) / (consts.k_B * theta)).exp();
    w /= w.sum();
    Matrix rho = es.eigenvectors() * w.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
    return DensityOperator::make(std::move(rho));
}

DensityOperator microcanonical(int dim) {
    if (dim < 1) throw std::invalid_argument("microcanonical: dim must be >= 1");
    return DensityOperator::make(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

double shannon_entropy(const DensityOperator& rho, const Constants& consts) {
    RealVector lam = hermitian_eigenvalues(rho.mat());
    double s = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        const double p = std::max(lam(i), 0.0);
        if (p > 0.0) s -= p * std::log(p);
    }
    return consts.k_B * s;
}

PartialEntropies partial_entropies(const DensityOperator& rho, const Constants& consts) {
    PartialEntropies out;
    out.s1 = shannon_entropy(rho.reduced(1), consts);
    out.s2 = shannon_entropy(rho.reduced(2), consts);
    out.gap = out.s1 + out.s2 - shannon_entropy(rho, consts);
    return out;
}

double entropy_rate(const Propagator& ro, const DensityOperator& rho, double z,
                    const Constants& consts) {
    if (ro.dim() != rho.dim()) {
        throw DimensionError("entropy_rate: propagator/state dimension mismatch");
    }
    return -consts.k_B * real_trace_product(ro.mat(), log_scaled(rho.mat(), z));
}

}  // namespace qtd
