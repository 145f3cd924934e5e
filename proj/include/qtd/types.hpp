#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qtd {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

/// Physical constants used throughout; desk-scale defaults.
struct Constants {
    double k_B = 1.0;
    double hbar = 1.0;
};

/// Dimensions of the two tensor factors of a bipartite Hilbert space.
/// Composite basis ordering is row-major: composite index = k * d2 + l.
struct HilbertDims {
    int d1 = 1;
    int d2 = 1;

    HilbertDims() = default;
    HilbertDims(int dim1, int dim2) : d1(dim1), d2(dim2) {
        if (d1 < 1 || d2 < 1) {
            throw std::invalid_argument("HilbertDims: dimensions must be >= 1, got d1=" +
                                        std::to_string(d1) + ", d2=" + std::to_string(d2));
        }
    }

    int total() const { return d1 * d2; }

    bool operator==(const HilbertDims& o) const { return d1 == o.d1 && d2 == o.d2; }
};

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Infeasible or degenerate linear constraint system; carries rank diagnostics.
struct ConstraintError : std::runtime_error {
    int rank = 0;
    int n_constraints = 0;
    ConstraintError(const std::string& msg, int rank_, int n_constraints_)
        : std::runtime_error(msg), rank(rank_), n_constraints(n_constraints_) {}
};

namespace tol {
// Construction-time invariant tolerances.
inline constexpr double hermiticity = 1e-12;
inline constexpr double trace_unit = 1e-10;
inline constexpr double psd = 1e-10;
inline constexpr double propagator_trace = 1e-10;
inline constexpr double split_sum = 1e-12;
// Eigenvalue clamps for matrix logarithms: entropy-style logs keep the
// p*ln(p) -> 0 limit, operator-valued logs must stay bounded.
inline constexpr double log_clamp_entropy = 1e-300;
inline constexpr double log_clamp_operator = 1e-12;
// Imaginary parts of observable traces above this are a hard error.
inline constexpr double imag_part = 1e-10;
}  // namespace tol

}  // namespace qtd
