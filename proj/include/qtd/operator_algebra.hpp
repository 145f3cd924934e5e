#pragma once

#include <cstdint>

#include "qtd/types.hpp"

namespace qtd {

/// A dense complex matrix kept Hermitian by construction: the input is
/// symmetrized to (A + A^dag)/2 and the pre-symmetrization deviation is
/// recorded for drift diagnostics.
class HermitianOp {
  public:
    HermitianOp() = default;
    explicit HermitianOp(Matrix m);

    static HermitianOp zero(int dim) { return HermitianOp(Matrix::Zero(dim, dim)); }
    static HermitianOp identity(int dim) { return HermitianOp(Matrix::Identity(dim, dim)); }

    const Matrix& mat() const { return mat_; }
    int dim() const { return static_cast<int>(mat_.rows()); }
    /// Max-abs entry of (A - A^dag)/2 of the constructor argument.
    double hermiticity_defect() const { return defect_; }

  private:
    Matrix mat_;
    double defect_ = 0.0;
};

/// A <x> I_2 in the composite basis (composite index k*d2 + l).
HermitianOp embed_left(const HermitianOp& a, const HilbertDims& dims);
/// I_1 <x> B.
HermitianOp embed_right(const HermitianOp& b, const HilbertDims& dims);

Matrix kronecker(const Matrix& a, const Matrix& b);

/// Trace over sub-system `over` (1 or 2). over=1 keeps factor 2 (dim d2),
/// over=2 keeps factor 1 (dim d1). Preserves the total trace.
Matrix partial_trace(const Matrix& a, int over, const HilbertDims& dims);
HermitianOp partial_trace(const HermitianOp& a, int over, const HilbertDims& dims);

/// AB - BA. Anti-Hermitian when A and B are Hermitian.
Matrix commutator(const Matrix& a, const Matrix& b);

/// exp(A) through the spectral decomposition; positive definite for Hermitian A.
HermitianOp mat_exp_hermitian(const HermitianOp& a);

/// log of a PSD matrix with eigenvalues clamped from below at `eps` before the
/// scalar log, so rank-deficient states stay representable.
HermitianOp mat_log_regularized(const Matrix& psd, double eps);

/// log(z * A) = ln(z) I + log(A), with the operator-log clamp.
Matrix log_scaled(const Matrix& psd, double z, double eps = tol::log_clamp_operator);

/// Real part of Tr(M), with a hard error when the imaginary part exceeds the
/// observable tolerance (signals a broken Hermiticity invariant upstream).
double real_trace(const Matrix& m);
double real_trace_product(const Matrix& a, const Matrix& b);

/// Sorted ascending eigenvalues of a Hermitian matrix.
RealVector hermitian_eigenvalues(const Matrix& m);

/// Deterministic stream of pseudo-random values, keyed by a seed and a label
/// so independent draws never share a stream.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);
    Rng(std::uint64_t seed, const std::string& label);

    double uniform();                  // [0, 1)
    double uniform(double lo, double hi);
    double gaussian();                 // Box-Muller, platform independent
    int uniform_int(int lo, int hi);   // inclusive bounds

  private:
    std::uint64_t next();
    std::uint64_t s_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

HermitianOp random_hermitian(int dim, Rng& rng, double scale = 1.0);
/// Random density operator with full rank bounded away from zero.
Matrix random_density_matrix(int dim, Rng& rng);
/// Random Hermitian traceless matrix (propagator-shaped).
Matrix random_traceless_hermitian(int dim, Rng& rng, double scale = 1.0);

}  // namespace qtd
