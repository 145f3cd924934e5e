#pragma once

#include <optional>

#include "qtd/operator_algebra.hpp"

namespace qtd {

/// Unit-trace, positive-semidefinite Hermitian matrix; optionally carries the
/// bipartite factor dimensions.
class DensityOperator {
  public:
    DensityOperator() = default;

    /// Validates Hermiticity (by symmetrization), PSD and unit trace.
    static DensityOperator make(Matrix m, std::optional<HilbertDims> dims = std::nullopt);
    /// Skips the spectral checks; for integrator internals and RK stages.
    static DensityOperator unchecked(Matrix m, std::optional<HilbertDims> dims = std::nullopt);

    const Matrix& mat() const { return op_.mat(); }
    int dim() const { return op_.dim(); }
    bool bipartite() const { return dims_.has_value(); }
    const HilbertDims& dims() const;
    double hermiticity_defect() const { return op_.hermiticity_defect(); }

    /// Reduced state of sub-system 1 (trace over 2) / sub-system 2 (trace over 1).
    DensityOperator reduced(int keep) const;

  private:
    HermitianOp op_;
    std::optional<HilbertDims> dims_;
};

/// The traceless Hermitian term added to the von Neumann flow; optionally
/// split into an exchange part and a dissipative part remaining under
/// isolation, with ex + iso equal to the total.
class Propagator {
  public:
    Propagator() = default;

    static Propagator zero(int dim);
    static Propagator make(Matrix m);
    static Propagator make_split(Matrix ex, Matrix iso);

    const Matrix& mat() const { return op_.mat(); }
    int dim() const { return op_.dim(); }
    bool has_split() const { return has_split_; }
    const Matrix& ex() const;
    const Matrix& iso() const;

  private:
    HermitianOp op_;
    bool has_split_ = false;
    Matrix ex_, iso_;
};

/// rho = sum_j p_j |phi_j><phi_j| from an orthonormal basis (columns) and a
/// probability vector.
DensityOperator from_weights(const Matrix& basis, const RealVector& p,
                             std::optional<HilbertDims> dims = std::nullopt);

/// Propagator sum_j pdot_j |phi_j><phi_j| with sum(pdot) = 0.
Propagator propagator_from_weight_rates(const Matrix& basis, const RealVector& p_dot);

/// exp(-H/(k_B theta)) / Z. Commutes with H.
DensityOperator canonical(const HermitianOp& h, double theta, const Constants& consts = {});

/// I/dim.
DensityOperator microcanonical(int dim);

/// -k_B sum_i lambda_i ln lambda_i with the 0*ln(0) = 0 convention.
double shannon_entropy(const DensityOperator& rho, const Constants& consts = {});

struct PartialEntropies {
    double s1 = 0.0;
    double s2 = 0.0;
    /// s1 + s2 - s of the joint state; subadditivity keeps it >= 0.
    double gap = 0.0;
};

PartialEntropies partial_entropies(const DensityOperator& rho, const Constants& consts = {});

/// -k_B Tr(ro ln(Z rho)); independent of Z because Tr(ro) = 0.
double entropy_rate(const Propagator& ro, const DensityOperator& rho, double z = 1.0,
                    const Constants& consts = {});

}  // namespace qtd
