#include "doctest.h"

#include "qtd/propagator_models.hpp"
#include "qtd/thermo.hpp"

using namespace qtd;

namespace {
double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Matrix embed1(const Matrix& m, const HilbertDims& d) {
    return kronecker(m, Matrix::Identity(d.d2, d.d2));
}
Matrix embed2(const Matrix& m, const HilbertDims& d) {
    return kronecker(Matrix::Identity(d.d1, d.d1), m);
}

struct RandomScene {
    HilbertDims dims{2, 2};
    Matrix h1e, h2e, h12, h;
    DensityOperator rho;
    Propagator ro;
};

RandomScene make_scene(Rng& rng, double h12_scale = 0.5, bool split = true) {
    RandomScene s;
    s.dims = HilbertDims(rng.uniform_int(2, 3), rng.uniform_int(2, 3));
    const int d = s.dims.total();
    s.h1e = embed1(random_hermitian(s.dims.d1, rng).mat(), s.dims);
    s.h2e = embed2(random_hermitian(s.dims.d2, rng).mat(), s.dims);
    s.h12 = h12_scale * random_hermitian(d, rng).mat();
    s.h = s.h1e + s.h2e + s.h12;
    s.rho = DensityOperator::make(random_density_matrix(d, rng), s.dims);
    if (split) {
        s.ro = Propagator::make_split(random_traceless_hermitian(d, rng, 0.3),
                                      random_traceless_hermitian(d, rng, 0.3));
    } else {
        s.ro = Propagator::zero(d);
    }
    return s;
}

Temperatures generic_temps() {
    Temperatures t;
    t.theta = 1.0;
    t.theta1 = 0.8;
    t.theta2 = 1.3;
    t.t_box = 1.1;
    t.t1 = 0.9;
    t.t2 = 1.2;
    return t;
}
}  // namespace

TEST_CASE("energy: zero Hamiltonian, canonical value") {
    Rng rng(1, "energy");
    const DensityOperator rho = DensityOperator::make(random_density_matrix(3, rng));
    CHECK(energy(rho, Matrix::Zero(3, 3)) == 0.0);
    const Matrix h = random_hermitian(3, rng).mat();
    CHECK(energy(rho, h) == doctest::Approx((h * rho.mat()).trace().real()));
}

TEST_CASE("power exchanges: static protocols give zero, linear coupling gives c*a_dot") {
    HilbertDims dims(2, 2);
    Matrix hz = Matrix::Zero(2, 2);
    hz(1, 1) = 1.0;

    // Static triple.
    const HamiltonianTriple fixed =
        HamiltonianTriple::constant(dims, hz, hz, Matrix::Zero(4, 4));
    const DensityOperator rho = microcanonical(4);
    const DensityOperator rho_b = DensityOperator::make(rho.mat(), dims);
    const PowerExchanges none = power_exchanges(rho_b, fixed, 0.5);
    CHECK(none.w1_ex == 0.0);
    CHECK(none.internal_sum() == 0.0);

    // d(H1)/d(a1) = c * I: the power is c * a1_dot regardless of the state.
    const double c = 0.7;
    HamiltonianTriple::LinearBlock b1{hz, {c * Matrix::Identity(2, 2)}, {}};
    HamiltonianTriple::LinearBlock b2{hz, {}, {}};
    Protocol a1({0.0, 1.0}, {RealVector::Zero(1), RealVector::Constant(1, 2.0)});
    const HamiltonianTriple triple = HamiltonianTriple::linear(
        dims, b1, b2, Matrix::Zero(4, 4), {}, a1, Protocol{}, Protocol{});
    const PowerExchanges pw = power_exchanges(rho_b, triple, 0.5);
    CHECK(pw.w1_ex == doctest::Approx(c * 2.0).epsilon(1e-12));
}

TEST_CASE("undecomposed power equals the sum of the five exchange terms") {
    Rng rng(3, "power-sum");
    HilbertDims dims(2, 2);
    Matrix k1 = random_hermitian(2, rng).mat();
    Matrix k2 = random_hermitian(2, rng).mat();
    Matrix m1 = random_hermitian(2, rng).mat();
    Matrix m2 = random_hermitian(2, rng).mat();
    Matrix k12 = random_hermitian(4, rng).mat();
    HamiltonianTriple::LinearBlock b1{random_hermitian(2, rng).mat(), {k1}, {m1}};
    HamiltonianTriple::LinearBlock b2{random_hermitian(2, rng).mat(), {k2}, {m2}};
    Protocol a1({0.0, 1.0}, {RealVector::Constant(1, 0.1), RealVector::Constant(1, 0.9)});
    Protocol a2({0.0, 1.0}, {RealVector::Constant(1, -0.3), RealVector::Constant(1, 0.4)});
    Protocol a12({0.0, 1.0}, {RealVector::Constant(1, 0.0), RealVector::Constant(1, 0.5)});
    const HamiltonianTriple triple = HamiltonianTriple::linear(
        dims, b1, b2, random_hermitian(4, rng).mat(), {k12}, a1, a2, a12);
    const DensityOperator rho = DensityOperator::make(random_density_matrix(4, rng), dims);

    const double t = 0.37;
    const PowerExchanges pw = power_exchanges(rho, triple, t);
    const double five_terms =
        pw.w1_ex + pw.w2_ex + pw.w1_int + pw.w2_int + pw.w12_int;

    // Independent route: finite-difference the total Hamiltonian along t.
    const double dt = 1e-6;
    const Matrix dh = (triple.total_at(t + dt) - triple.total_at(t - dt)) / (2.0 * dt);
    const double w_direct = real_trace_product(dh, rho.mat());
    CHECK(five_terms == doctest::Approx(w_direct).epsilon(1e-6));
}

TEST_CASE("heat exchanges: zero propagator and interaction give silence") {
    Rng rng(5, "heat-zero");
    RandomScene s = make_scene(rng, 0.0, false);
    const HeatExchanges q = heat_exchanges(s.rho, s.h1e, s.h2e, s.h12, s.ro);
    CHECK(std::abs(q.q1) < 1e-12);
    CHECK(std::abs(q.q2) < 1e-12);
    CHECK(std::abs(q.q12) < 1e-12);
}

TEST_CASE("heat exchanges: additivity and split balances") {
    Rng rng(7, "heat-add");
    for (int trial = 0; trial < 25; ++trial) {
        RandomScene s = make_scene(rng);
        const HeatExchanges q = heat_exchanges(s.rho, s.h1e, s.h2e, s.h12, s.ro);
        CHECK(q.q1 + q.q2 + q.q12 == doctest::Approx(q.q_total).epsilon(1e-10));
        CHECK(q.q1_int + q.q2_int + q.q12_int == doctest::Approx(q.q_int).epsilon(1e-10));
        CHECK(q.q1_ex + q.q2_ex + q.q12_ex == doctest::Approx(q.q_ex).epsilon(1e-10));
        CHECK(q.q1 == doctest::Approx(q.q1_ex + q.q1_int).epsilon(1e-10));
        CHECK(q.q12 == doctest::Approx(q.q12_ex + q.q12_int).epsilon(1e-10));
    }
}

TEST_CASE("sub-system heat: both published routes agree") {
    Rng rng(9, "heat-routes");
    RandomScene s = make_scene(rng);
    const HeatExchanges q = heat_exchanges(s.rho, s.h1e, s.h2e, s.h12, s.ro);
    const Complex i(0.0, 1.0);
    const Matrix ro1 = partial_trace(s.ro.mat(), 2, s.dims);
    const Matrix h1s = partial_trace(s.h1e, 2, s.dims) / static_cast<double>(s.dims.d2);
    const double via_traced = real_trace_product(h1s, ro1) +
                              real_trace_product(s.h12, (i * commutator(s.h1e, s.rho.mat())));
    CHECK(q.q1 == doctest::Approx(via_traced).epsilon(1e-10));
}

TEST_CASE("non-inertness vanishes with the interaction Hamiltonian") {
    Rng rng(11, "inert-h12");
    RandomScene s = make_scene(rng, 0.0);
    const HeatExchanges q = heat_exchanges(s.rho, s.h1e, s.h2e, s.h12, s.ro);
    CHECK(std::abs(q.q12_int) <= 1e-12);
    CHECK(std::abs(q.q12_ex) <= 1e-12);
}

TEST_CASE("heat exchange requires a split propagator") {
    Rng rng(13, "heat-needs-split");
    RandomScene s = make_scene(rng);
    const Propagator bare = Propagator::make(s.ro.mat());
    CHECK_THROWS_AS(heat_exchanges(s.rho, s.h1e, s.h2e, s.h12, bare), std::logic_error);
}

TEST_CASE("entropy rates: silence, original-quantum activity, additivity") {
    Rng rng(15, "entropy-rates");
    // H12 = 0 and ro = 0: everything is silent.
    RandomScene quiet = make_scene(rng, 0.0, false);
    const EntropyRates silent = entropy_rates(quiet.rho, quiet.ro, quiet.h12);
    CHECK(std::abs(silent.s_dot) < 1e-12);
    CHECK(std::abs(silent.s1_dot) < 1e-12);
    CHECK(std::abs(silent.s2_dot) < 1e-12);

    // Correlated state, ro = 0, H12 != 0: the sub-system rates need not
    // vanish (for an exact product state they do, because the reduced log
    // commutes with the state).
    HilbertDims dims(2, 2);
    const DensityOperator rho = DensityOperator::make(random_density_matrix(4, rng), dims);
    const Matrix h12 = random_hermitian(4, rng).mat();
    const EntropyRates oqu = entropy_rates(rho, Propagator::zero(4), h12);
    CHECK(std::abs(oqu.s_dot) < 1e-12);
    CHECK(std::abs(oqu.s1_dot) > 1e-6);  // thermodynamic activity without a propagator

    const Matrix prod =
        kronecker(random_density_matrix(2, rng), random_density_matrix(2, rng));
    const DensityOperator rho_prod = DensityOperator::make(prod, dims);
    const EntropyRates quiet_prod = entropy_rates(rho_prod, Propagator::zero(4), h12);
    CHECK(std::abs(quiet_prod.s1_dot) < 1e-12);

    // Additivity for a product state without interaction.
    const Propagator ro = Propagator::make(random_traceless_hermitian(4, rng, 0.2));
    const EntropyRates add = entropy_rates(rho_prod, ro, Matrix::Zero(4, 4));
    CHECK(add.s1_dot + add.s2_dot == doctest::Approx(add.s_dot).epsilon(1e-10));
}

TEST_CASE("entropy exchange: silence and the sign flip at matched temperatures") {
    Rng rng(17, "xi");
    RandomScene s = make_scene(rng);
    Temperatures temps = generic_temps();

    HeatExchanges zero;
    const EntropyExchanges none = entropy_exchanges(zero, temps);
    CHECK(none.xi1_ex == 0.0);
    CHECK(none.xi_box == 0.0);

    // Matched contact and environment temperatures silence the external
    // exchange of the constrained propagator.
    temps.theta1 = temps.t_box;
    temps.theta2 = temps.t_box;
    ConstitutiveOmega ox{ConstitutiveOmega::Kind::linear, 1.0,
                         ConstitutiveOmega::Channel::external};
    ConstitutiveOmega oi{ConstitutiveOmega::Kind::linear, 1.0,
                         ConstitutiveOmega::Channel::internal};
    const Propagator ro =
        constrained_split_propagator(s.h1e, s.h2e, s.h12, s.rho, temps, ox, oi);
    const HeatExchanges q = heat_exchanges(s.rho, s.h1e, s.h2e, s.h12, ro);
    const EntropyExchanges xi = entropy_exchanges(q, temps);
    CHECK(std::abs(xi.xi1_ex) < 1e-10);
    CHECK(std::abs(xi.xi2_ex) < 1e-10);
}

TEST_CASE("external entropy exchanges satisfy the compound inequality") {
    Rng rng(19, "xi-compound");
    ConstitutiveOmega ox{ConstitutiveOmega::Kind::linear, 0.7,
                         ConstitutiveOmega::Channel::external};
    ConstitutiveOmega oi{ConstitutiveOmega::Kind::linear, 0.4,
                         ConstitutiveOmega::Channel::internal};
    for (int trial = 0; trial < 20; ++trial) {
        RandomScene s = make_scene(rng);
        Temperatures temps = generic_temps();
        temps.t_box = rng.uniform(0.5, 2.0);
        const Propagator ro =
            constrained_split_propagator(s.h1e, s.h2e, s.h12, s.rho, temps, ox, oi);
        const HeatExchanges q = heat_exchanges(s.rho, s.h1e, s.h2e, s.h12, ro);
        const EntropyExchanges xi = entropy_exchanges(q, temps);
        CHECK(xi.xi1_ex + xi.xi2_ex + xi.xi_box >= -1e-10);
    }
}

TEST_CASE("entropy production: equilibrium silence and the oqu bound") {
    Rng rng(21, "sigma");
    // Diagonal everything: canonical reduced states, commuting interaction.
    HilbertDims dims(2, 2);
    Matrix h1s = Matrix::Zero(2, 2);
    h1s(1, 1) = 1.0;
    Matrix h2s = Matrix::Zero(2, 2);
    h2s(1, 1) = 0.6;
    const double temp = 1.1;
    const Matrix rho_prod =
        kronecker(canonical(HermitianOp(h1s), temp).mat(),
                  canonical(HermitianOp(h2s), temp).mat());
    const DensityOperator rho = DensityOperator::make(rho_prod, dims);
    Matrix h12 = Matrix::Zero(4, 4);
    h12(0, 0) = 0.05;
    h12(3, 3) = -0.05;
    Temperatures temps = generic_temps();
    temps.theta1 = temp;
    temps.theta2 = temp;
    const EntropyProductions sig = entropy_production(rho, embed1(h1s, dims), embed2(h2s, dims),
                                                      h12, temps, Propagator::zero(4));
    CHECK(std::abs(sig.sigma1) < 1e-10);
    CHECK(std::abs(sig.sigma2) < 1e-10);
    CHECK(sig.sigma1 == doctest::Approx(sig.sigma1_oqu).epsilon(1e-12));

    // ro = 0 makes the two evaluations coincide by definition.
    Rng rng2(22, "sigma-oqu");
    RandomScene s = make_scene(rng2);
    const EntropyProductions on_zero = entropy_production(
        s.rho, s.h1e, s.h2e, s.h12, generic_temps(), Propagator::zero(s.dims.total()));
    CHECK(on_zero.sigma1 == doctest::Approx(on_zero.sigma1_oqu).epsilon(1e-12));
    CHECK(on_zero.sigma2 == doctest::Approx(on_zero.sigma2_oqu).epsilon(1e-12));
}

TEST_CASE("separated sub-systems produce non-negative entropy") {
    Rng rng(23, "sigma-sep");
    for (int trial = 0; trial < 20; ++trial) {
        HilbertDims dims(2, 2);
        const Matrix h1s = random_hermitian(2, rng).mat();
        const Matrix h2s = random_hermitian(2, rng).mat();
        const DensityOperator rho = DensityOperator::make(random_density_matrix(4, rng), dims);
        // Separation propagators on each factor, no interaction.
        const Propagator sep1 =
            separation_propagator(HermitianOp(h1s), rho.reduced(1));
        const Propagator sep2 =
            separation_propagator(HermitianOp(h2s), rho.reduced(2));
        const Matrix full = kronecker(sep1.mat(), Matrix::Identity(2, 2) / 2.0) +
                            kronecker(Matrix::Identity(2, 2) / 2.0, sep2.mat());
        Temperatures temps = generic_temps();
        const EntropyProductions sig =
            entropy_production(rho, embed1(h1s, dims), embed2(h2s, dims), Matrix::Zero(4, 4),
                               temps, Propagator::make(full));
        // With no interaction the exchange terms vanish and the production
        // reduces to the separation entropy rate.
        CHECK(sig.sigma1 >= -1e-9);
        CHECK(sig.sigma2 >= -1e-9);
    }
}

TEST_CASE("contact temperature: canonical states return their temperature") {
    Rng rng(25, "theta");
    for (double theta0 : {0.5, 1.0, 2.0}) {
        const HermitianOp h = random_hermitian(4, rng);
        const DensityOperator rho = canonical(h, theta0);
        for (int trial = 0; trial < 5; ++trial) {
            Matrix ro_ex = random_traceless_hermitian(4, rng);
            if (std::abs(real_trace_product(h.mat(), ro_ex)) < 0.1) continue;
            const ContactTemperature ct = contact_temperature(rho, h.mat(), ro_ex);
            CHECK(ct.positive);
            CHECK(ct.theta == doctest::Approx(theta0).epsilon(1e-9));
            for (double z : {0.1, 10.0}) {
                const ContactTemperature ct_z = contact_temperature(rho, h.mat(), ro_ex, z);
                CHECK(std::abs(ct_z.inverse - ct.inverse) < 1e-10);
            }
        }
    }
}

TEST_CASE("contact temperature requires a nonzero exchange propagator") {
    Rng rng(27, "theta-zero");
    const HermitianOp h = random_hermitian(3, rng);
    const DensityOperator rho = canonical(h, 1.0);
    CHECK_THROWS_AS(contact_temperature(rho, h.mat(), Matrix::Zero(3, 3)), std::domain_error);
}

TEST_CASE("compound deficiencies") {
    Rng rng(29, "cd");
    RandomScene s = make_scene(rng);
    // Hamiltonian: exactly the interaction block.
    CHECK(max_abs(hamiltonian_compound_deficiency(s.h, s.h1e, s.h2e) - s.h12) < 1e-12);
    // Entropy: never above zero.
    CHECK(entropy_compound_deficiency(s.rho) <= 1e-10);
    const Matrix prod = kronecker(random_density_matrix(2, rng), random_density_matrix(2, rng));
    CHECK(std::abs(entropy_compound_deficiency(
              DensityOperator::make(prod, HilbertDims(2, 2)))) < 1e-10);
    // Entropy rate: the ledger difference equals the closed form.
    const EntropyRates rates = entropy_rates(s.rho, s.ro, s.h12);
    CHECK(entropy_rate_compound_deficiency(rates) ==
          doctest::Approx(entropy_rate_compound_deficiency_direct(s.rho, s.ro, s.h12))
              .epsilon(1e-10));
}

TEST_CASE("partition classification") {
    Temperatures temps = generic_temps();
    HeatExchanges q;
    q.q12_int = 0.0;
    temps.t1 = temps.t2 = 1.0;
    PartitionClass pc = classify_partition(q, temps, 1e-10);
    CHECK(pc.inertness == Inertness::inert);
    CHECK(pc.sheet == SheetKind::mono_sheet);

    q.q12_int = 0.2;
    temps.t1 = 0.9;
    temps.t2 = 1.2;
    pc = classify_partition(q, temps, 1e-10);
    CHECK(pc.inertness == Inertness::non_inert);
    CHECK(pc.sheet == SheetKind::double_sheet);
}

TEST_CASE("inert mono-sheet proposition: matched temperatures kill the internal heats") {
    ConstitutiveOmega oi{ConstitutiveOmega::Kind::linear, 1.3,
                         ConstitutiveOmega::Channel::internal};
    const double theta12 = 1.4;
    // Joint contact temperature equal to the partition temperature.
    CHECK(std::abs(omega_eval(oi, 1.0 / theta12 - 1.0 / theta12)) <= 1e-10);
}

TEST_CASE("first law: static silent scenario and random balance") {
    Rng rng(31, "first-law");
    HilbertDims dims(2, 2);
    Matrix hz = Matrix::Zero(2, 2);
    hz(1, 1) = 1.0;
    const HamiltonianTriple triple =
        HamiltonianTriple::constant(dims, hz, hz, Matrix::Zero(4, 4));
    const DensityOperator rho = DensityOperator::make(random_density_matrix(4, rng), dims);
    const PowerExchanges pw = power_exchanges(rho, triple, 0.0);
    const HeatExchanges q = heat_exchanges(rho, triple.h1_at(0), triple.h2_at(0),
                                           triple.h12_at(0), Propagator::zero(4));
    const FirstLawRates fl = first_law_rates(pw, q);
    CHECK(fl.e1_dot == 0.0);
    CHECK(fl.e2_dot == 0.0);
    CHECK(std::abs(fl.residual) < 1e-12);
}

TEST_CASE("ledger: balances hold on constrained scenarios") {
    Rng rng(33, "ledger");
    ConstitutiveOmega ox{ConstitutiveOmega::Kind::linear, 0.9,
                         ConstitutiveOmega::Channel::external};
    ConstitutiveOmega oi{ConstitutiveOmega::Kind::linear, 0.6,
                         ConstitutiveOmega::Channel::internal};
    for (int trial = 0; trial < 10; ++trial) {
        RandomScene s = make_scene(rng);
        const HamiltonianTriple triple = HamiltonianTriple::constant(
            s.dims, partial_trace(s.h1e, 2, s.dims) / s.dims.d2,
            partial_trace(s.h2e, 1, s.dims) / s.dims.d1, s.h12);
        Temperatures temps = generic_temps();
        const Propagator ro =
            constrained_split_propagator(s.h1e, s.h2e, s.h12, s.rho, temps, ox, oi);
        const ExchangeLedger lg = compute_ledger(s.rho, triple, 0.0, temps, ro);
        const double scale = std::max({1.0, std::abs(lg.E1_dot), std::abs(lg.E2_dot)});
        CHECK(std::abs(lg.r_first_law) / scale < 1e-9);
        CHECK(std::abs(lg.r_heat_sum) < 1e-10);
        CHECK(std::abs(lg.r_heat_ex) < 1e-10);
        CHECK(std::abs(lg.r_heat_int) < 1e-10);
        CHECK(std::abs(lg.Q_int) < 1e-10);       // vanishing internal heat sum
        CHECK(std::abs(lg.Q12_ex) < 1e-10);      // silent partition exchange
        CHECK(std::abs(lg.r_entropy_rate_cd) < 1e-10);
        CHECK(std::abs(lg.r_split_trace) < 1e-10);
    }
}

TEST_CASE("ledger: inert partition constrains the state rate") {
    Rng rng(35, "mmf");
    RandomScene s = make_scene(rng);
    const Complex i(0.0, 1.0);
    // Force a fully inert, setting-compliant propagator: external heats through
    // h1/h2 only, vanishing internal sum, vanishing non-inertness.
    const Matrix comm12 = (i * commutator(s.h12, s.rho.mat())).eval();
    const Matrix comm_sum = (i * commutator(s.h1e + s.h2e, s.rho.mat())).eval();
    std::vector<Matrix> ex_ops{s.h1e, s.h2e, s.h12};
    RealVector ex_t(3);
    ex_t << 0.4, -0.1, 0.0;
    const Matrix ro_ex = min_norm_traceless(ex_ops, ex_t);
    std::vector<Matrix> iso_ops{s.h1e, s.h2e, s.h, s.h12};
    RealVector iso_t(4);
    const double q1_int_target = 0.2;
    iso_t << q1_int_target + real_trace_product(s.h1e, comm12),
        -q1_int_target + real_trace_product(s.h2e, comm12), 0.0,
        real_trace_product(s.h12, comm_sum);
    const Matrix ro_iso = min_norm_traceless(iso_ops, iso_t);
    const Propagator ro = Propagator::make_split(ro_ex, ro_iso);

    const HeatExchanges q = heat_exchanges(s.rho, s.h1e, s.h2e, s.h12, ro);
    CHECK(std::abs(q.q12_int) < 1e-9);
    CHECK(q.q1_int == doctest::Approx(q1_int_target).epsilon(1e-9));

    // The state rate is then silent against the interaction block.
    const Matrix rho_dot = -i * commutator(s.h, s.rho.mat()) + ro.mat();
    CHECK(std::abs(real_trace_product(s.h12, rho_dot)) < 1e-9);
}

TEST_CASE("inequality suite: degenerate and ordered temperature configurations") {
    Rng rng(37, "suite");
    RandomScene s = make_scene(rng);
    ConstitutiveOmega ox{ConstitutiveOmega::Kind::linear, 1.0,
                         ConstitutiveOmega::Channel::external};
    ConstitutiveOmega oi{ConstitutiveOmega::Kind::linear, 1.0,
                         ConstitutiveOmega::Channel::internal};

    Temperatures temps;
    temps.theta1 = 0.8;
    temps.theta2 = 1.5;
    // The undecomposed contact temperature between the sub-system ones.
    temps.theta = 2.0 / (1.0 / temps.theta1 + 1.0 / temps.theta2);
    temps.t_box = 1.05;
    temps.t1 = 0.85;
    temps.t2 = 1.4;
    const HamiltonianTriple triple = HamiltonianTriple::constant(
        s.dims, partial_trace(s.h1e, 2, s.dims) / s.dims.d2,
        partial_trace(s.h2e, 1, s.dims) / s.dims.d1, s.h12);
    const Propagator ro =
        constrained_split_propagator(s.h1e, s.h2e, s.h12, s.rho, temps, ox, oi);
    const ExchangeLedger lg = compute_ledger(s.rho, triple, 0.0, temps, ro);
    const auto suite = inequality_suite(lg, temps, 1e-9);
    for (const auto& r : suite) {
        INFO(r.name);
        CHECK(r.satisfied);
    }

    // Degenerate ordering: equal contact temperatures zero the margins.
    Temperatures eq = temps;
    eq.theta1 = eq.theta2 = eq.theta = 1.0;
    const Propagator ro_eq =
        constrained_split_propagator(s.h1e, s.h2e, s.h12, s.rho, eq, ox, oi);
    const ExchangeLedger lg_eq = compute_ledger(s.rho, triple, 0.0, eq, ro_eq);
    for (const auto& r : inequality_suite(lg_eq, eq, 1e-9)) {
        if (r.name == "defining_sub1_external" || r.name == "defining_sub2_external") {
            CHECK(std::abs(r.margin) <=
                  1e-9 + std::pow(1.0 / eq.theta1 - 1.0 / eq.t_box, 2.0));
        }
    }

    // Sign chain of the external heat exchange across the sweep.
    auto q_ex_at = [&](double t_box) {
        return ox(1.0 / temps.theta1 - 1.0 / t_box) + ox(1.0 / temps.theta2 - 1.0 / t_box);
    };
    CHECK(q_ex_at(temps.theta2) >= 0.0);
    CHECK(q_ex_at(temps.theta1) <= 0.0);
    CHECK(std::abs(q_ex_at(temps.theta)) < 1e-12);
}

TEST_CASE("undecomposed ledger and sigma forms") {
    Rng rng(39, "un-ledger");
    const Matrix h = random_hermitian(3, rng).mat();
    const HamiltonianProtocol ham = HamiltonianProtocol::constant(h);
    const DensityOperator rho = canonical(HermitianOp(h), 0.8);
    ConstitutiveOmega ox{ConstitutiveOmega::Kind::linear, 1.0,
                         ConstitutiveOmega::Channel::external};
    Temperatures temps;
    temps.theta = 0.9;
    temps.t_box = 1.3;
    const Propagator ro = constrained_exchange_propagator(h, rho, temps.theta, temps.t_box, ox);
    const ExchangeLedger lg = compute_ledger_undecomposed(rho, ham, 0.0, temps, ro);
    CHECK(lg.Q_total == doctest::Approx(ox(1.0 / 0.9 - 1.0 / 1.3)).epsilon(1e-10));
    CHECK(lg.Xi == doctest::Approx(lg.Q_total / temps.theta).epsilon(1e-12));
    CHECK(std::abs(lg.r_first_law) < 1e-12);

    // The two production forms coincide when theta matches the extraction.
    const ContactTemperature ct = contact_temperature(rho, h, ro.ex());
    Temperatures extracted = temps;
    extracted.theta = ct.theta;
    const ExchangeLedger lg2 = compute_ledger_undecomposed(rho, ham, 0.0, extracted, ro);
    CHECK(std::abs(lg2.Sigma_form_gap) < 1e-9);
}

TEST_CASE("entropy production and rates are Z-invariant") {
    Rng rng(40, "sigma-z");
    RandomScene s = make_scene(rng);
    const Temperatures temps = generic_temps();
    const EntropyProductions base =
        entropy_production(s.rho, s.h1e, s.h2e, s.h12, temps, s.ro, 1.0);
    const EntropyRates base_rates = entropy_rates(s.rho, s.ro, s.h12, 1.0);
    for (double z : {0.1, 10.0}) {
        const EntropyProductions sz =
            entropy_production(s.rho, s.h1e, s.h2e, s.h12, temps, s.ro, z);
        CHECK(std::abs(sz.sigma1 - base.sigma1) < 1e-10);
        CHECK(std::abs(sz.sigma2 - base.sigma2) < 1e-10);
        CHECK(std::abs(sz.sigma1_oqu - base.sigma1_oqu) < 1e-10);
        const EntropyRates rz = entropy_rates(s.rho, s.ro, s.h12, z);
        CHECK(std::abs(rz.s1_dot - base_rates.s1_dot) < 1e-10);
        CHECK(std::abs(rz.s2_dot - base_rates.s2_dot) < 1e-10);
    }
}

TEST_CASE("original quantum mechanics without interaction is endoreversible") {
    Rng rng(41, "oqu");
    RandomScene s = make_scene(rng, 0.0, false);
    const EntropyProductions sig = entropy_production(
        s.rho, s.h1e, s.h2e, s.h12, generic_temps(), Propagator::zero(s.dims.total()));
    CHECK(std::abs(sig.sigma1_oqu) < 1e-12);
    CHECK(std::abs(sig.sigma2_oqu) < 1e-12);
}
