#include "doctest.h"

#include "qtd/operator_algebra.hpp"

using namespace qtd;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

}  // namespace

TEST_CASE("embed_left: identity maps to composite identity") {
    HilbertDims dims(2, 3);
    const HermitianOp e = embed_left(HermitianOp::identity(2), dims);
    CHECK(max_abs(e.mat() - Matrix::Identity(6, 6)) == doctest::Approx(0.0));
}

TEST_CASE("embed_left: diag(1,-1) with d2=2 gives diag(1,1,-1,-1)") {
    HilbertDims dims(2, 2);
    const HermitianOp e = embed_left(HermitianOp(pauli_z()), dims);
    Matrix expected = Matrix::Zero(4, 4);
    expected(0, 0) = 1.0;
    expected(1, 1) = 1.0;
    expected(2, 2) = -1.0;
    expected(3, 3) = -1.0;
    CHECK(max_abs(e.mat() - expected) == doctest::Approx(0.0));
}

TEST_CASE("embedded left and right operators commute") {
    Rng rng(7, "embed-commute");
    for (int trial = 0; trial < 20; ++trial) {
        HilbertDims dims(rng.uniform_int(2, 4), rng.uniform_int(2, 4));
        const HermitianOp a = random_hermitian(dims.d1, rng);
        const HermitianOp b = random_hermitian(dims.d2, rng);
        const Matrix c = commutator(embed_left(a, dims).mat(), embed_right(b, dims).mat());
        CHECK(max_abs(c) < 1e-12);
    }
}

TEST_CASE("embed dimension mismatch throws") {
    HilbertDims dims(2, 3);
    CHECK_THROWS_AS(embed_left(HermitianOp::identity(3), dims), DimensionError);
    CHECK_THROWS_AS(embed_right(HermitianOp::identity(2), dims), DimensionError);
}

TEST_CASE("partial_trace: product state factors recover") {
    Rng rng(11, "pt-product");
    for (int trial = 0; trial < 10; ++trial) {
        HilbertDims dims(rng.uniform_int(2, 4), rng.uniform_int(2, 4));
        const Matrix rho1 = random_density_matrix(dims.d1, rng);
        const Matrix rho2 = random_density_matrix(dims.d2, rng);
        const Matrix joint = kronecker(rho1, rho2);
        CHECK(max_abs(partial_trace(joint, 2, dims) - rho1) < 1e-13);
        CHECK(max_abs(partial_trace(joint, 1, dims) - rho2) < 1e-13);
    }
}

TEST_CASE("partial_trace: Bell state reduces to I/2") {
    // (|00> + |11>)/sqrt(2): expanding the four projector coefficients by
    // hand leaves 1/2 on each diagonal of the reduced state.
    HilbertDims dims(2, 2);
    ComplexVector bell = ComplexVector::Zero(4);
    bell(0) = 1.0 / std::sqrt(2.0);
    bell(3) = 1.0 / std::sqrt(2.0);
    const Matrix proj = bell * bell.adjoint();
    const Matrix reduced = partial_trace(proj, 2, dims);
    CHECK(max_abs(reduced - 0.5 * Matrix::Identity(2, 2)) < 1e-15);
}

TEST_CASE("partial_trace preserves the trace") {
    Rng rng(13, "pt-trace");
    HilbertDims dims(3, 4);
    const Matrix a = random_hermitian(12, rng).mat();
    CHECK(std::abs(partial_trace(a, 1, dims).trace() - a.trace()) < 1e-12);
    CHECK(std::abs(partial_trace(a, 2, dims).trace() - a.trace()) < 1e-12);
    const Matrix rho = random_density_matrix(12, rng);
    CHECK(partial_trace(partial_trace(rho, 1, dims), 1, HilbertDims(1, 4)).trace().real() ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("partial_trace is linear") {
    Rng rng(17, "pt-linear");
    HilbertDims dims(2, 3);
    const Matrix a = random_hermitian(6, rng).mat();
    const Matrix b = random_hermitian(6, rng).mat();
    const Matrix lhs = partial_trace(2.5 * a - 0.75 * b, 2, dims);
    const Matrix rhs = 2.5 * partial_trace(a, 2, dims) - 0.75 * partial_trace(b, 2, dims);
    CHECK(max_abs(lhs - rhs) < 1e-13);
}

TEST_CASE("commutator basics") {
    Rng rng(19, "comm");
    const Matrix a = random_hermitian(5, rng).mat();
    CHECK(max_abs(commutator(a, a)) == doctest::Approx(0.0));

    const Matrix b = random_hermitian(5, rng).mat();
    CHECK(std::abs(commutator(a, b).trace()) < 1e-13);

    // Anti-Hermitian for Hermitian arguments.
    const Matrix c = commutator(a, b);
    CHECK(max_abs(c.adjoint() + c) < 1e-12);
}

TEST_CASE("commutator of diag with off-diagonal: 2x2 hand expansion") {
    Matrix a = Matrix::Zero(2, 2);
    a(0, 0) = 2.0;
    a(1, 1) = -1.0;
    Matrix b = Matrix::Zero(2, 2);
    b(0, 1) = Complex(1.0, 2.0);
    b(1, 0) = Complex(1.0, -2.0);
    const Matrix c = commutator(a, b);
    // [diag(a,b), offdiag(z)] = offdiag((a-b) z, -(a-b) conj(z))
    CHECK(c(0, 0) == Complex(0.0, 0.0));
    CHECK(c(1, 1) == Complex(0.0, 0.0));
    CHECK(c(0, 1) == Complex(3.0, 6.0));
    CHECK(c(1, 0) == Complex(-3.0, 6.0));
}

TEST_CASE("mat_exp_hermitian: zero gives identity, diagonal case") {
    CHECK(max_abs(mat_exp_hermitian(HermitianOp::zero(3)).mat() - Matrix::Identity(3, 3)) <
          1e-15);
    Matrix d = Matrix::Zero(2, 2);
    d(1, 1) = -1.0;
    const Matrix e = mat_exp_hermitian(HermitianOp(d)).mat();
    CHECK(e(0, 0).real() == doctest::Approx(1.0));
    CHECK(e(1, 1).real() == doctest::Approx(std::exp(-1.0)));
    CHECK(std::abs(e(0, 1)) < 1e-15);
}

TEST_CASE("mat_log_regularized: maximally mixed state") {
    const Matrix rho = Matrix::Identity(4, 4) / 4.0;
    const Matrix l = mat_log_regularized(rho, 1e-300).mat();
    CHECK(max_abs(l - std::log(0.25) * Matrix::Identity(4, 4)) < 1e-14);
}

TEST_CASE("mat_log_regularized: pure state entropy vanishes under the clamp") {
    ComplexVector psi = ComplexVector::Zero(3);
    psi(1) = 1.0;
    const Matrix rho = psi * psi.adjoint();
    const Matrix l = mat_log_regularized(rho, 1e-300).mat();
    // -Tr(rho log rho): the zero eigenvalues contribute 0 * log(eps).
    const double entropy = -(rho * l).trace().real();
    CHECK(std::abs(entropy) < 1e-9);
}

TEST_CASE("exp/log round trips") {
    Rng rng(23, "explog");
    for (int trial = 0; trial < 10; ++trial) {
        const int d = rng.uniform_int(2, 6);
        const Matrix rho = random_density_matrix(d, rng);
        const Matrix back = mat_exp_hermitian(mat_log_regularized(rho, 1e-12)).mat();
        CHECK(max_abs(back - rho) < 1e-10);

        const HermitianOp a = random_hermitian(d, rng);
        const HermitianOp expa = mat_exp_hermitian(a);
        const Matrix z_rho = expa.mat() / expa.mat().trace().real();
        const Matrix recovered = mat_log_regularized(z_rho, 1e-300).mat();
        // log of the normalized exponential recovers A up to a multiple of I.
        const Matrix diff = recovered - a.mat();
        const Matrix traceless =
            diff - (diff.trace() / static_cast<double>(d)) * Matrix::Identity(d, d);
        CHECK(max_abs(traceless) < 1e-10);
    }
}

TEST_CASE("tracing identity: Tr^1 [A^1, B] vanishes entrywise") {
    Rng rng(29, "tr1-comm");
    for (int trial = 0; trial < 25; ++trial) {
        HilbertDims dims(rng.uniform_int(2, 4), rng.uniform_int(2, 4));
        const Matrix a1 = embed_left(random_hermitian(dims.d1, rng), dims).mat();
        const Matrix b = random_hermitian(dims.total(), rng).mat();
        CHECK(max_abs(partial_trace(commutator(a1, b), 1, dims)) < 1e-12);
    }
}

TEST_CASE("trace commutation: Tr^2 Tr^1 A = Tr^1 Tr^2 A = Tr A") {
    Rng rng(31, "tr-commute");
    HilbertDims dims(3, 2);
    const Matrix a = random_hermitian(6, rng).mat();
    const Complex via1 = partial_trace(a, 1, dims).trace();
    const Complex via2 = partial_trace(a, 2, dims).trace();
    CHECK(std::abs(via1 - a.trace()) < 1e-12);
    CHECK(std::abs(via2 - a.trace()) < 1e-12);
}

TEST_CASE("mixed-trace identity: Tr(A^1 B) = Tr^1(A^1 B^1)") {
    Rng rng(37, "mixed-trace");
    for (int trial = 0; trial < 25; ++trial) {
        HilbertDims dims(rng.uniform_int(2, 4), rng.uniform_int(2, 4));
        const Matrix a_sub = random_hermitian(dims.d1, rng).mat();
        const Matrix a1 = kronecker(a_sub, Matrix::Identity(dims.d2, dims.d2));
        const Matrix b = random_hermitian(dims.total(), rng).mat();
        const Complex lhs = (a1 * b).trace();
        const Matrix b1 = partial_trace(b, 2, dims);
        const Complex rhs = (a_sub * b1).trace();
        CHECK(std::abs(lhs - rhs) < 1e-11);
    }
}

TEST_CASE("real_trace rejects large imaginary parts") {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = Complex(0.0, 1.0);
    CHECK_THROWS_AS(real_trace(m), std::runtime_error);
}

TEST_CASE("degenerate factor dimensions behave") {
    // d1 = 1: the composite space IS factor 2.
    HilbertDims dims(1, 3);
    Rng rng(41, "degenerate");
    const Matrix a = random_hermitian(3, rng).mat();
    CHECK((partial_trace(a, 1, dims) - a).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    const Matrix scalar = partial_trace(a, 2, dims);
    CHECK(scalar.rows() == 1);
    CHECK(std::abs(scalar(0, 0) - a.trace()) < 1e-14);
    const HermitianOp wide = embed_right(HermitianOp(a), dims);
    CHECK((wide.mat() - a).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("rng streams are reproducible and label-separated") {
    Rng a(42, "alpha");
    Rng b(42, "alpha");
    Rng c(42, "beta");
    const double av = a.uniform();
    CHECK(av == b.uniform());
    CHECK(av != c.uniform());
}
