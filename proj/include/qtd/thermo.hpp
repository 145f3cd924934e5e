#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qtd/protocol.hpp"
#include "qtd/state.hpp"

namespace qtd {

/// The three Hamiltonian blocks of a bipartite system with their
/// work-variable dependence. All callbacks return composite-space
/// (embedded) matrices. The interaction block depends on the shared work
/// variables only, so its derivatives with respect to a1/a2 vanish
/// structurally.
struct HamiltonianTriple {
    HilbertDims dims;

    Protocol a1, a2, a12;

    std::function<Matrix(const RealVector& a_own, const RealVector& a_shared)> h1, h2;
    std::function<Matrix(const RealVector& a_shared)> h12;
    std::function<std::vector<Matrix>(const RealVector&, const RealVector&)> dh1_da1, dh2_da2,
        dh1_da12, dh2_da12;
    std::function<std::vector<Matrix>(const RealVector&)> dh12_da12;

    Matrix h1_at(double t) const { return h1(a1.value(t), a12.value(t)); }
    Matrix h2_at(double t) const { return h2(a2.value(t), a12.value(t)); }
    Matrix h12_at(double t) const { return h12(a12.value(t)); }
    Matrix total_at(double t) const { return h1_at(t) + h2_at(t) + h12_at(t); }

    /// Static Hamiltonians: h1/h2 given on their sub-spaces, h12 on the
    /// composite space; no work variables.
    static HamiltonianTriple constant(const HilbertDims& dims, const Matrix& h1_sub,
                                      const Matrix& h2_sub, const Matrix& h12_comp);

    /// Linear work-variable coupling per block:
    ///   H^A = base^A + sum_i a^A_i K^A_i + sum_j a12_j M^A_j,
    ///   H^12 = base^12 + sum_j a12_j K^12_j.
    /// Blocks for sub-systems are given on their sub-spaces and embedded.
    struct LinearBlock {
        Matrix base;
        std::vector<Matrix> couple_own;     // paired with a1 (resp. a2) components
        std::vector<Matrix> couple_shared;  // paired with a12 components
    };
    static HamiltonianTriple linear(const HilbertDims& dims, LinearBlock b1, LinearBlock b2,
                                    Matrix h12_base, std::vector<Matrix> h12_couple,
                                    Protocol a1, Protocol a2, Protocol a12);
};

/// Undecomposed system: one Hamiltonian with one work-variable protocol.
struct HamiltonianProtocol {
    Protocol a;
    std::function<Matrix(const RealVector&)> h;
    std::function<std::vector<Matrix>(const RealVector&)> dh_da;

    Matrix at(double t) const { return h(a.value(t)); }

    static HamiltonianProtocol constant(const Matrix& h0);
    static HamiltonianProtocol linear(Matrix base, std::vector<Matrix> couple, Protocol a);
};

/// Per-step snapshot of the temperatures entering the exchange laws.
struct Temperatures {
    double theta = 1.0;   // contact temperature of the undecomposed system
    double theta1 = 1.0;  // contact temperatures of the sub-systems
    double theta2 = 1.0;
    double t_box = 1.0;   // thermostatic temperature of the environment
    double t1 = 1.0;      // replacement temperatures of the internal exchange
    double t2 = 1.0;
    std::optional<double> t12;      // partition temperature (mono-sheet)
    std::optional<double> theta12;  // joint contact temperature, when equal

    void validate() const;
};

/// Per-time-step record of every power, heat, entropy quantity and the
/// signed residuals of the balance laws.
struct ExchangeLedger {
    double t = 0.0;

    double E = 0.0, E1 = 0.0, E2 = 0.0, E12 = 0.0;

    double W1_ex = 0.0, W2_ex = 0.0, W_ex = 0.0;
    double W1_int = 0.0, W2_int = 0.0, W12_int = 0.0, W_int_sum = 0.0;

    double Q1 = 0.0, Q2 = 0.0, Q12 = 0.0, Q_total = 0.0;
    double Q1_ex = 0.0, Q2_ex = 0.0, Q12_ex = 0.0, Q_ex = 0.0;
    double Q1_int = 0.0, Q2_int = 0.0, Q12_int = 0.0, Q_int = 0.0;

    double E1_dot = 0.0, E2_dot = 0.0, E12_dot = 0.0, E_dot = 0.0;

    double S = 0.0, S1 = 0.0, S2 = 0.0, S_gap = 0.0;
    double S_dot = 0.0, S1_dot = 0.0, S2_dot = 0.0;
    double S1_dot_ex = 0.0, S1_dot_int = 0.0, S2_dot_ex = 0.0, S2_dot_int = 0.0;

    double Xi = 0.0;  // undecomposed entropy exchange Q_total/theta
    double Xi1_ex = 0.0, Xi2_ex = 0.0, Xi1_int = 0.0, Xi2_int = 0.0, Xi_box = 0.0;

    double Sigma1 = 0.0, Sigma2 = 0.0, Sigma1_oqu = 0.0, Sigma2_oqu = 0.0;
    double Sigma = 0.0, Sigma_iso_form = 0.0, Sigma_form_gap = 0.0;

    double theta = 0.0, theta1 = 0.0, theta2 = 0.0, t_box = 0.0, t1 = 0.0, t2 = 0.0;
    double theta_extracted = 0.0, theta_extracted_ok = 0.0;
    double theta1_extracted = 0.0, theta1_extracted_ok = 0.0;
    double theta2_extracted = 0.0, theta2_extracted_ok = 0.0;

    double r_first_law = 0.0;
    double r_heat_sum = 0.0;
    double r_heat_ex = 0.0;
    double r_heat_int = 0.0;
    double r_split_trace = 0.0;
    double r_entropy_rate_cd = 0.0;
    double inert_constraint = 0.0;  // Tr(H12 * rho_dot)

    double inert_flag = 0.0, mono_sheet_flag = 0.0;

    double trace_defect = 0.0, herm_drift = 0.0, min_eigenvalue = 0.0;
};

double energy(const DensityOperator& rho, const Matrix& h);

struct PowerExchanges {
    double w1_ex = 0.0, w2_ex = 0.0;
    double w1_int = 0.0, w2_int = 0.0, w12_int = 0.0;
    double w_ex() const { return w1_ex + w2_ex; }
    /// Diagnostic against the vanishing-internal-power setting; not enforced.
    double internal_sum() const { return w1_int + w2_int + w12_int; }
};
PowerExchanges power_exchanges(const DensityOperator& rho, const HamiltonianTriple& triple,
                               double t);

struct HeatExchanges {
    double q1 = 0.0, q2 = 0.0, q12 = 0.0;
    double q1_ex = 0.0, q2_ex = 0.0, q12_ex = 0.0;
    double q1_int = 0.0, q2_int = 0.0, q12_int = 0.0;  // q12_int = non-inertness
    double q_total = 0.0;                              // Tr(H ro)
    double q_ex = 0.0;                                 // Tr(H ro_ex)
    double q_int = 0.0;                                // Tr(H ro_iso)
};
/// Requires a propagator carrying its ex/iso split.
HeatExchanges heat_exchanges(const DensityOperator& rho, const Matrix& h1e, const Matrix& h2e,
                             const Matrix& h12, const Propagator& ro,
                             const Constants& consts = {});

struct EntropyRates {
    double s_dot = 0.0;  // undecomposed
    double s1_dot = 0.0, s2_dot = 0.0;
    double s1_dot_ex = 0.0, s1_dot_int = 0.0;
    double s2_dot_ex = 0.0, s2_dot_int = 0.0;
};
EntropyRates entropy_rates(const DensityOperator& rho, const Propagator& ro, const Matrix& h12,
                           double z = 1.0, const Constants& consts = {});

struct EntropyExchanges {
    double xi1_ex = 0.0, xi2_ex = 0.0;
    double xi1_int = 0.0, xi2_int = 0.0;
    double xi_box = 0.0;  // -Q_ex / T_box
};
EntropyExchanges entropy_exchanges(const HeatExchanges& heats, const Temperatures& temps);

struct EntropyProductions {
    double sigma1 = 0.0, sigma2 = 0.0;
    double sigma1_oqu = 0.0, sigma2_oqu = 0.0;  // propagator-free evaluation
};
EntropyProductions entropy_production(const DensityOperator& rho, const Matrix& h1e,
                                      const Matrix& h2e, const Matrix& h12,
                                      const Temperatures& temps, const Propagator& ro,
                                      double z = 1.0, const Constants& consts = {});

/// Undecomposed entropy production in its two equivalent forms. They agree
/// when theta is the contact temperature realized by ro_ex.
struct UndecomposedSigma {
    double bracket_form = 0.0;  // -Tr{(H/theta + k_B ln(Z rho)) ro}
    double iso_form = 0.0;      // -k_B Tr{ro_iso ln(Z rho)}
    double gap() const { return bracket_form - iso_form; }
};
UndecomposedSigma entropy_production_undecomposed(const DensityOperator& rho, const Matrix& h,
                                                  double theta, const Propagator& ro,
                                                  double z = 1.0, const Constants& consts = {});

struct ContactTemperature {
    double theta = 0.0;
    double inverse = 0.0;
    bool positive = false;  // a non-positive extraction is reported, never hidden
};
/// Extraction from the exchange propagator; requires Tr(h ro_ex) away from 0.
ContactTemperature contact_temperature(const DensityOperator& rho, const Matrix& h,
                                       const Matrix& ro_ex, double z = 1.0,
                                       const Constants& consts = {});
/// Sub-system variant: h_a embedded, the log taken on the reduced state.
ContactTemperature contact_temperature_sub(const DensityOperator& rho, const Matrix& h_a_embedded,
                                           int subsystem, const Matrix& ro_ex, double z = 1.0,
                                           const Constants& consts = {});

/// Compound deficiencies: undecomposed quantity minus the sum over sub-systems.
Matrix hamiltonian_compound_deficiency(const Matrix& h, const Matrix& h1e, const Matrix& h2e);
double entropy_compound_deficiency(const DensityOperator& rho, const Constants& consts = {});
/// S1_dot + S2_dot - S_dot evaluated from the rates.
double entropy_rate_compound_deficiency(const EntropyRates& rates);
/// The same difference in closed form from the propagator and the logs.
double entropy_rate_compound_deficiency_direct(const DensityOperator& rho, const Propagator& ro,
                                               const Matrix& h12, double z = 1.0,
                                               const Constants& consts = {});
double energy_rate_compound_deficiency(const ExchangeLedger& ledger);

enum class Inertness { inert, non_inert };
enum class SheetKind { mono_sheet, double_sheet };
struct PartitionClass {
    Inertness inertness = Inertness::inert;
    SheetKind sheet = SheetKind::mono_sheet;
};
PartitionClass classify_partition(const HeatExchanges& heats, const Temperatures& temps,
                                  double tolerance);

struct InequalityResult {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  // lhs - rhs, signed
    bool satisfied = false;
    bool applicable = true;
};
/// Evaluates every exchange inequality the ledger carries channels for;
/// partition-specific entries are gated on the classification.
std::vector<InequalityResult> inequality_suite(const ExchangeLedger& ledger,
                                               const Temperatures& temps,
                                               double tolerance = 1e-9);

struct FirstLawRates {
    double e1_dot = 0.0, e2_dot = 0.0, e12_dot = 0.0;
    double residual = 0.0;  // e1_dot + e2_dot + e12_dot - w_ex - q_ex
};
FirstLawRates first_law_rates(const PowerExchanges& power, const HeatExchanges& heats);

/// Full per-step ledger for a bipartite scenario.
ExchangeLedger compute_ledger(const DensityOperator& rho, const HamiltonianTriple& triple,
                              double t, const Temperatures& temps, const Propagator& ro,
                              const Constants& consts = {}, double z = 1.0,
                              double partition_tol = 1e-10);

/// Reduced ledger for an undecomposed scenario.
ExchangeLedger compute_ledger_undecomposed(const DensityOperator& rho,
                                           const HamiltonianProtocol& ham, double t,
                                           const Temperatures& temps, const Propagator& ro,
                                           const Constants& consts = {}, double z = 1.0);

}  // namespace qtd
