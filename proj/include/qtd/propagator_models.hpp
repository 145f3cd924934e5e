#pragma once

#include "qtd/thermo.hpp"

namespace qtd {

/// Constitutive law for a heat-exchange channel: a strictly monotone odd
/// function of the inverse-temperature difference. Only the linear kind is
/// built in; the call interface admits any strictly monotone odd law.
struct ConstitutiveOmega {
    enum class Kind { linear };
    enum class Channel { external, internal };

    Kind kind = Kind::linear;
    double kappa = 1.0;  // energy/time per inverse temperature
    Channel channel = Channel::external;

    double operator()(double x) const;
};

double omega_eval(const ConstitutiveOmega& omega, double x);

/// Quasi-static heat reservoir: thermostatic temperature, its slow rate and
/// the reservoir Hamiltonian (on the reservoir sub-space).
struct ReservoirSpec {
    double t_hr = 1.0;
    double tdot_hr = 0.0;
    HermitianOp h2;

    void validate() const;
    /// True when |tdot| is large enough to strain the quasi-static picture.
    bool rate_suspicious() const { return std::abs(tdot_hr) > 1e-2 * t_hr; }
};

/// Propagator [H_A, [ln(Z rho_A), H_A]]: silent in the heat exchange of A,
/// non-negative in its entropy rate. Carries an all-iso split.
Propagator separation_propagator(const HermitianOp& h_a, const DensityOperator& rho_a,
                                 double z = 1.0);

struct ReservoirRate {
    Matrix rho_dot;  // time derivative of the form-invariant canonical state
    Matrix c_op;     // rho_dot = c_op * tdot_hr
};
/// Differentiates the canonical reservoir state along its temperature drift.
ReservoirRate reservoir_rate(const ReservoirSpec& spec, double z = 1.0,
                             const Constants& consts = {});

/// Propagator of the reservoir sub-system (on the reservoir sub-space):
/// (i/hbar) Tr^1[H12, rho] + C tdot. `h12` and `rho_full` live on the
/// composite space with the reservoir as factor 2.
Propagator reservoir_propagator(const ReservoirSpec& spec, const Matrix& h12,
                                const DensityOperator& rho_full, double z = 1.0,
                                const Constants& consts = {});

/// Reservoir heat capacity Tr(H2 C); positive for canonical states.
double reservoir_heat_capacity(const ReservoirSpec& spec, double z = 1.0,
                               const Constants& consts = {});

/// Minimum-Frobenius-norm Hermitian traceless X with Tr(ops[i] X) = targets[i]
/// for every i. Throws ConstraintError when the system is infeasible.
Matrix min_norm_traceless(const std::vector<Matrix>& ops, const RealVector& targets);

/// Same, restricted to matrices diagonal in the given orthonormal eigenbasis
/// (columns), i.e. commuting with the state that basis diagonalizes.
Matrix min_norm_diagonal(const std::vector<Matrix>& ops, const RealVector& targets,
                         const Matrix& eigenbasis);

enum class PropagatorSupport { full, diagonal };

/// Exchange/iso propagator pair realizing the constitutive heat-exchange
/// targets:
///   ro_ex:  Tr(H^A ro_ex) = Omega_ex(1/Theta^A - 1/T_box), Tr(H12 ro_ex) = 0;
///   ro_iso: Tr(H ro_iso) = 0 and the internal-channel targets
///           Tr^A(H^A ro_iso^A) - (i/hbar) Tr(H^A [H12, rho])
///             = Omega_int(1/Theta^A - 1/T^A).
/// Minimum-norm closure; `diagonal` additionally restricts both parts to the
/// commutant of rho.
Propagator constrained_split_propagator(const Matrix& h1e, const Matrix& h2e, const Matrix& h12,
                                        const DensityOperator& rho, const Temperatures& temps,
                                        const ConstitutiveOmega& omega_ex,
                                        const ConstitutiveOmega& omega_int,
                                        const Constants& consts = {},
                                        PropagatorSupport support = PropagatorSupport::full);

/// Undecomposed variant: ro_ex alone realizes Tr(H ro_ex) = Omega_ex(1/Theta -
/// 1/T_box); the iso part is zero.
Propagator constrained_exchange_propagator(const Matrix& h, const DensityOperator& rho,
                                           double theta, double t_box,
                                           const ConstitutiveOmega& omega_ex,
                                           PropagatorSupport support = PropagatorSupport::full);

}  // namespace qtd
