#include "qtd/operator_algebra.hpp"

#include <cmath>
#include <cstring>

#include <Eigen/Eigenvalues>

namespace qtd {

HermitianOp::HermitianOp(Matrix m) {
    if (m.rows() != m.cols()) {
        throw DimensionError("HermitianOp: matrix must be square, got " +
                             std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    Matrix anti = 0.5 * (m - m.adjoint());
    defect_ = anti.cwiseAbs().maxCoeff();
    mat_ = 0.5 * (m + m.adjoint());
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

HermitianOp embed_left(const HermitianOp& a, const HilbertDims& dims) {
    if (a.dim() != dims.d1) {
        throw DimensionError("embed_left: operator dim " + std::to_string(a.dim()) +
                             " does not match d1=" + std::to_string(dims.d1));
    }
    return HermitianOp(kronecker(a.mat(), Matrix::Identity(dims.d2, dims.d2)));
}

HermitianOp embed_right(const HermitianOp& b, const HilbertDims& dims) {
    if (b.dim() != dims.d2) {
        throw DimensionError("embed_right: operator dim " + std::to_string(b.dim()) +
                             " does not match d2=" + std::to_string(dims.d2));
    }
    return HermitianOp(kronecker(Matrix::Identity(dims.d1, dims.d1), b.mat()));
}

Matrix partial_trace(const Matrix& a, int over, const HilbertDims& dims) {
    if (a.rows() != dims.total() || a.cols() != dims.total()) {
        throw DimensionError("partial_trace: matrix dim " + std::to_string(a.rows()) +
                             " does not match composite dim " + std::to_string(dims.total()));
    }
    if (over == 1) {
        Matrix out = Matrix::Zero(dims.d2, dims.d2);
        for (int l = 0; l < dims.d2; ++l) {
            for (int q = 0; q < dims.d2; ++q) {
                Complex s = 0.0;
                for (int m = 0; m < dims.d1; ++m) {
                    s += a(m * dims.d2 + l, m * dims.d2 + q);
                }
                out(l, q) = s;
            }
        }
        return out;
    }
    if (over == 2) {
        Matrix out = Matrix::Zero(dims.d1, dims.d1);
        for (int k = 0; k < dims.d1; ++k) {
            for (int p = 0; p < dims.d1; ++p) {
                Complex s = 0.0;
                for (int m = 0; m < dims.d2; ++m) {
                    s += a(k * dims.d2 + m, p * dims.d2 + m);
                }
                out(k, p) = s;
            }
        }
        return out;
    }
    throw std::invalid_argument("partial_trace: `over` must be 1 or 2");
}

HermitianOp partial_trace(const HermitianOp& a, int over, const HilbertDims& dims) {
    return HermitianOp(partial_trace(a.mat(), over, dims));
}

Matrix commutator(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("commutator: dimension mismatch " + std::to_string(a.rows()) +
                             " vs " + std::to_string(b.rows()));
    }
    return a * b - b * a;
}

HermitianOp mat_exp_hermitian(const HermitianOp& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.mat());
    RealVector lam = es.eigenvalues();
    RealVector expl = lam.array().exp();
    return HermitianOp(es.eigenvectors() * expl.asDiagonal() * es.eigenvectors().adjoint());
}

HermitianOp mat_log_regularized(const Matrix& psd, double eps) {
    if (eps <= 0.0) {
        throw std::invalid_argument("mat_log_regularized: eps must be positive");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(HermitianOp(psd).mat());
    RealVector lam = es.eigenvalues();
    RealVector logl(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        logl(i) = std::log(std::max(lam(i), eps));
    }
    return HermitianOp(es.eigenvectors() * logl.asDiagonal() * es.eigenvectors().adjoint());
}

Matrix log_scaled(const Matrix& psd, double z, double eps) {
    if (z <= 0.0) {
        throw std::invalid_argument("log_scaled: scale must be positive");
    }
    const int d = static_cast<int>(psd.rows());
    return mat_log_regularized(psd, eps).mat() + std::log(z) * Matrix::Identity(d, d);
}

double real_trace(const Matrix& m) {
    Complex tr = m.trace();
    if (std::abs(tr.imag()) > tol::imag_part * std::max(1.0, std::abs(tr.real()))) {
        throw std::runtime_error("real_trace: imaginary part " + std::to_string(tr.imag()) +
                                 " exceeds tolerance; Hermiticity broken upstream");
    }
    return tr.real();
}

double real_trace_product(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("real_trace_product: dimension mismatch");
    }
    // Tr(AB) without forming AB.
    Complex tr = (a.transpose().cwiseProduct(b)).sum();
    if (std::abs(tr.imag()) > tol::imag_part * std::max(1.0, std::abs(tr.real()))) {
        throw std::runtime_error("real_trace_product: imaginary part " +
                                 std::to_string(tr.imag()) +
                                 " exceeds tolerance; Hermiticity broken upstream");
    }
    return tr.real();
}

RealVector hermitian_eigenvalues(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

namespace {
std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& si : s_) si = splitmix64(x);
}

Rng::Rng(std::uint64_t seed, const std::string& label) : Rng(seed ^ fnv1a(label)) {}

std::uint64_t Rng::next() {
    // xoshiro256**
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::gaussian() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

int Rng::uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
}

HermitianOp random_hermitian(int dim, Rng& rng, double scale) {
    Matrix m(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            m(i, j) = Complex(rng.gaussian(), rng.gaussian());
        }
    }
    return HermitianOp(scale * m);
}

Matrix random_density_matrix(int dim, Rng& rng) {
    Matrix g(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            g(i, j) = Complex(rng.gaussian(), rng.gaussian());
        }
    }
    Matrix rho = g * g.adjoint();
    // Mix with the maximally mixed state so eigenvalues stay well off zero.
    rho /= rho.trace().real();
    rho = 0.9 * rho + 0.1 * Matrix::Identity(dim, dim) / static_cast<double>(dim);
    return 0.5 * (rho + rho.adjoint());
}

Matrix random_traceless_hermitian(int dim, Rng& rng, double scale) {
    Matrix m = random_hermitian(dim, rng, scale).mat();
    m -= (m.trace() / static_cast<double>(dim)) * Matrix::Identity(dim, dim);
    return m;
}

}  // namespace qtd
