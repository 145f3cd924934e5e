#include "doctest.h"

#include "qtd/dynamics.hpp"
#include "qtd/propagator_models.hpp"

using namespace qtd;

namespace {
double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

/// Independent central-difference oracle for the reservoir state rate.
Matrix fd_reservoir_rate(const HermitianOp& h2, double t_hr, double tdot_hr, double h) {
    const Matrix hi = canonical(h2, t_hr + h).mat();
    const Matrix lo = canonical(h2, t_hr - h).mat();
    return (hi - lo) / (2.0 * h) * tdot_hr;
}
}  // namespace

TEST_CASE("omega: zero at zero, odd, linear slope") {
    ConstitutiveOmega omega{ConstitutiveOmega::Kind::linear, 2.0,
                            ConstitutiveOmega::Channel::external};
    CHECK(omega_eval(omega, 0.0) == 0.0);
    CHECK(omega_eval(omega, 0.5) == doctest::Approx(1.0));
    Rng rng(1, "omega-odd");
    for (int i = 0; i < 20; ++i) {
        const double x = rng.uniform(-3.0, 3.0);
        CHECK(omega_eval(omega, -x) == doctest::Approx(-omega_eval(omega, x)).epsilon(1e-12));
        // strictly monotone: sign(omega(x)) = sign(x)
        if (x != 0.0) CHECK(omega_eval(omega, x) * x > 0.0);
    }
}

TEST_CASE("separation propagator vanishes on canonical states") {
    Rng rng(3, "sep-canonical");
    const HermitianOp h = random_hermitian(4, rng);
    const DensityOperator rho = canonical(h, 1.1);
    const Propagator ro = separation_propagator(h, rho);
    CHECK(max_abs(ro.mat()) < 1e-10);
}

TEST_CASE("separation propagator: heat silence and entropy rate sign") {
    Rng rng(5, "sep-random");
    for (int trial = 0; trial < 50; ++trial) {
        const int d = rng.uniform_int(2, 6);
        const HermitianOp h = random_hermitian(d, rng);
        const DensityOperator rho = DensityOperator::make(random_density_matrix(d, rng));
        const Propagator ro = separation_propagator(h, rho);

        CHECK(std::abs(real_trace_product(h.mat(), ro.mat())) < 1e-10);

        const double s_dot = entropy_rate(ro, rho);
        CHECK(s_dot >= -1e-10);

        // Same value through Tr(K K^dag) with K = [ln(Z rho), H].
        const Matrix k = commutator(log_scaled(rho.mat(), 1.0), h.mat());
        const double via_k = real_trace_product(k, k.adjoint());
        CHECK(s_dot == doctest::Approx(via_k).epsilon(1e-9));

        // Z never enters: the identity commutes out of both commutators.
        const Propagator ro_z = separation_propagator(h, rho, 10.0);
        CHECK(max_abs(ro_z.mat() - ro.mat()) < 1e-10);
    }
}

TEST_CASE("reservoir rate: zero drift, zero rate") {
    Rng rng(7, "hr-zero");
    ReservoirSpec spec{1.5, 0.0, random_hermitian(3, rng)};
    const ReservoirRate rr = reservoir_rate(spec);
    CHECK(max_abs(rr.rho_dot) == 0.0);
}

TEST_CASE("reservoir rate matches central finite differences") {
    Rng rng(9, "hr-fd");
    for (int trial = 0; trial < 20; ++trial) {
        const int d = rng.uniform_int(2, 5);
        ReservoirSpec spec{rng.uniform(0.5, 2.0), rng.uniform(-0.05, 0.05),
                           random_hermitian(d, rng)};
        const ReservoirRate rr = reservoir_rate(spec);
        const Matrix fd = fd_reservoir_rate(spec.h2, spec.t_hr, spec.tdot_hr, 1e-5);
        CHECK(max_abs(rr.rho_dot - fd) < 1e-6);
        CHECK(std::abs(rr.rho_dot.trace()) < 1e-12);
    }
}

TEST_CASE("reservoir propagator: trivial inputs give zero") {
    Matrix h2 = Matrix::Zero(2, 2);
    h2(1, 1) = 1.0;
    ReservoirSpec spec{1.0, 0.0, HermitianOp(h2)};
    HilbertDims dims(2, 2);
    const DensityOperator rho = DensityOperator::make(
        kronecker(Matrix::Identity(2, 2) / 2.0, canonical(spec.h2, 1.0).mat()), dims);
    const Propagator ro = reservoir_propagator(spec, Matrix::Zero(4, 4), rho);
    CHECK(max_abs(ro.mat()) < 1e-14);
}

TEST_CASE("two-level reservoir heat capacity: eps^2 p (1-p) / (k_B T^2)") {
    const double eps = 0.8, t = 1.3;
    Matrix h2 = Matrix::Zero(2, 2);
    h2(1, 1) = eps;
    ReservoirSpec spec{t, 0.01, HermitianOp(h2)};
    const double c_hr = reservoir_heat_capacity(spec);
    const double p = std::exp(-eps / t) / (1.0 + std::exp(-eps / t));
    CHECK(c_hr == doctest::Approx(eps * eps * p * (1.0 - p) / (t * t)).epsilon(1e-10));
}

TEST_CASE("reservoir states stay form-invariantly canonical under the rate") {
    Rng rng(10, "hr-form");
    const HermitianOp h2 = random_hermitian(3, rng);
    const double t0 = 1.0, tdot = 0.02, t_end = 1.0;
    // Integrate d(rho)/dt = C(T(t)) * tdot alongside the commutator flow; the
    // state must track canonical(H2, T(t)).
    auto policy = [&](double t, const DensityOperator&) {
        ReservoirSpec spec{t0 + tdot * t, tdot, h2};
        const ReservoirRate rr = reservoir_rate(spec);
        return Propagator::make(rr.rho_dot);
    };
    EvolveOptions opt;
    opt.t_end = t_end;
    opt.dt = 1e-3;
    opt.record_every = 1 << 20;
    const Trajectory traj =
        evolve(canonical(h2, t0), [&](double) { return h2.mat(); }, policy, opt);
    const Matrix target = canonical(h2, t0 + tdot * t_end).mat();
    CHECK((traj.final_state.mat() - target).norm() < 1e-6);
}

TEST_CASE("reservoir heat capacity stays non-negative on random Hamiltonians") {
    Rng rng(11, "hr-capacity");
    for (int trial = 0; trial < 30; ++trial) {
        ReservoirSpec spec{rng.uniform(0.3, 3.0), 0.0,
                           random_hermitian(rng.uniform_int(2, 6), rng)};
        CHECK(reservoir_heat_capacity(spec) >= -1e-12);
    }
}

TEST_CASE("min_norm_traceless: zero targets give the zero matrix") {
    Rng rng(13, "mn-zero");
    std::vector<Matrix> ops{random_hermitian(4, rng).mat(), random_hermitian(4, rng).mat()};
    const Matrix x = min_norm_traceless(ops, RealVector::Zero(2));
    CHECK(max_abs(x) < 1e-14);
}

TEST_CASE("min_norm_traceless: random feasible targets are met") {
    Rng rng(17, "mn-random");
    for (int trial = 0; trial < 25; ++trial) {
        const int d = rng.uniform_int(2, 6);
        std::vector<Matrix> ops;
        const int m = rng.uniform_int(1, 3);
        for (int i = 0; i < m; ++i) ops.push_back(random_hermitian(d, rng).mat());
        RealVector targets(m);
        for (int i = 0; i < m; ++i) targets(i) = rng.uniform(-1.0, 1.0);
        const Matrix x = min_norm_traceless(ops, targets);
        CHECK(std::abs(x.trace()) < 1e-12);
        CHECK(max_abs(x - x.adjoint()) < 1e-13);
        for (int i = 0; i < m; ++i) {
            CHECK(real_trace_product(ops[i], x) == doctest::Approx(targets(i)).epsilon(1e-10));
        }
    }
}

TEST_CASE("min_norm_traceless: two-level x two-level spec case") {
    HilbertDims dims(2, 2);
    Matrix hz = Matrix::Zero(2, 2);
    hz(1, 1) = 1.0;
    const Matrix h1 = kronecker(hz, Matrix::Identity(2, 2));
    Matrix sx = Matrix::Zero(2, 2);
    sx(0, 1) = 1.0;
    sx(1, 0) = 1.0;
    const Matrix h12 = 0.3 * kronecker(sx, sx);

    std::vector<Matrix> ops{h1, h12};
    RealVector targets(2);
    targets << 0.3, 0.0;
    const Matrix x = min_norm_traceless(ops, targets);
    CHECK(real_trace_product(h1, x) == doctest::Approx(0.3).epsilon(1e-10));
    CHECK(std::abs(real_trace_product(h12, x)) < 1e-10);
}

TEST_CASE("min_norm_traceless reports infeasible systems") {
    // Tr(H X) = 1 and Tr(H X) = 0 through a dependent second operator.
    Rng rng(19, "mn-bad");
    const Matrix h = random_hermitian(3, rng).mat();
    std::vector<Matrix> ops{h, 2.0 * h};
    RealVector targets(2);
    targets << 1.0, 0.0;
    CHECK_THROWS_AS(min_norm_traceless(ops, targets), ConstraintError);
    try {
        min_norm_traceless(ops, targets);
    } catch (const ConstraintError& e) {
        CHECK(e.rank == 1);
        CHECK(e.n_constraints == 2);
    }
}

TEST_CASE("constrained split propagator meets the constitutive targets") {
    Rng rng(23, "split");
    HilbertDims dims(2, 3);
    const Matrix h1e = kronecker(random_hermitian(2, rng).mat(), Matrix::Identity(3, 3));
    const Matrix h2e = kronecker(Matrix::Identity(2, 2), random_hermitian(3, rng).mat());
    const Matrix h12 = 0.4 * random_hermitian(6, rng).mat();
    const Matrix h = h1e + h2e + h12;
    const DensityOperator rho = DensityOperator::make(random_density_matrix(6, rng), dims);
    Temperatures temps;
    temps.theta1 = 0.9;
    temps.theta2 = 1.4;
    temps.t_box = 1.1;
    temps.t1 = 1.0;
    temps.t2 = 1.2;
    ConstitutiveOmega ox{ConstitutiveOmega::Kind::linear, 0.8,
                         ConstitutiveOmega::Channel::external};
    ConstitutiveOmega oi{ConstitutiveOmega::Kind::linear, 0.5,
                         ConstitutiveOmega::Channel::internal};

    const Propagator ro = constrained_split_propagator(h1e, h2e, h12, rho, temps, ox, oi);
    CHECK(ro.has_split());
    CHECK(std::abs(ro.mat().trace()) < 1e-10);
    CHECK(std::abs(ro.ex().trace()) < 1e-10);
    CHECK(std::abs(ro.iso().trace()) < 1e-10);
    CHECK(max_abs(ro.ex() + ro.iso() - ro.mat()) < 1e-12);

    CHECK(real_trace_product(h1e, ro.ex()) ==
          doctest::Approx(ox(1.0 / temps.theta1 - 1.0 / temps.t_box)).epsilon(1e-10));
    CHECK(real_trace_product(h2e, ro.ex()) ==
          doctest::Approx(ox(1.0 / temps.theta2 - 1.0 / temps.t_box)).epsilon(1e-10));
    CHECK(std::abs(real_trace_product(h12, ro.ex())) < 1e-10);
    CHECK(std::abs(real_trace_product(h, ro.iso())) < 1e-10);

    // Tracing and splitting commute entrywise.
    const Matrix lhs = partial_trace(ro.ex() + ro.iso(), 2, dims);
    const Matrix rhs = partial_trace(ro.ex(), 2, dims) + partial_trace(ro.iso(), 2, dims);
    CHECK(max_abs(lhs - rhs) < 1e-12);
}

TEST_CASE("diagonal support keeps the propagator in the commutant of rho") {
    Rng rng(29, "split-diag");
    HilbertDims dims(2, 2);
    const Matrix h1e = kronecker(random_hermitian(2, rng).mat(), Matrix::Identity(2, 2));
    const Matrix h2e = kronecker(Matrix::Identity(2, 2), random_hermitian(2, rng).mat());
    const Matrix h12 = 0.2 * random_hermitian(4, rng).mat();
    const DensityOperator rho = DensityOperator::make(random_density_matrix(4, rng), dims);
    Temperatures temps;
    temps.theta1 = 1.2;
    temps.theta2 = 0.7;
    ConstitutiveOmega ox{ConstitutiveOmega::Kind::linear, 1.0,
                         ConstitutiveOmega::Channel::external};
    ConstitutiveOmega oi{ConstitutiveOmega::Kind::linear, 1.0,
                         ConstitutiveOmega::Channel::internal};
    const Propagator ro = constrained_split_propagator(h1e, h2e, h12, rho, temps, ox, oi, {},
                                                       PropagatorSupport::diagonal);
    CHECK(max_abs(commutator(ro.mat(), rho.mat())) < 1e-10);
    CHECK(real_trace_product(h1e, ro.ex()) ==
          doctest::Approx(ox(1.0 / temps.theta1 - 1.0 / temps.t_box)).epsilon(1e-10));
}

TEST_CASE("constrained exchange propagator (undecomposed)") {
    Rng rng(31, "ex-un");
    const Matrix h = random_hermitian(3, rng).mat();
    const DensityOperator rho = DensityOperator::make(random_density_matrix(3, rng));
    ConstitutiveOmega ox{ConstitutiveOmega::Kind::linear, 2.0,
                         ConstitutiveOmega::Channel::external};
    const Propagator ro = constrained_exchange_propagator(h, rho, 0.8, 1.2, ox);
    CHECK(real_trace_product(h, ro.ex()) ==
          doctest::Approx(ox(1.0 / 0.8 - 1.0 / 1.2)).epsilon(1e-10));
    CHECK(max_abs(ro.iso()) == 0.0);
}
