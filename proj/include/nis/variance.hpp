#pragma once

#include <Eigen/Dense>

#include "nis/models.hpp"
#include "nis/proposals.hpp"
#include "nis/quadrature.hpp"

namespace nis {

/// Theoretical variances of Z_hat for one noise model and one proposal.
struct VarianceReport {
  /// Var[Z_hat] under the supplied proposal.
  double v_q = 0.0;
  /// Minimum over all proposals, attained at q proportional to sqrt(m^2 + s^2).
  double v_min = 0.0;
  /// Var[Z_hat] when proposing from m / Z_bar.
  double v_sub_opt = 0.0;
  /// v_sub_opt / v_min.
  double ratio = 0.0;
  int n = 1;
  double z_bar = 0.0;
};

/// Z_bar, the integral of the mean function.
double normalizing_constant(const NoiseModel& noise, const QuadratureSpec& spec);

/// Integral of f_p(x) m(x); the unnormalized p-th moment E_p.
double moment_integral(const NoiseModel& noise, const VectorFunction& f, Eigen::Index p,
                       const QuadratureSpec& spec);

/// (1/N) integral (m^2 + s^2)/q - Z_bar^2/N.
double var_z_theoretical(const NoiseModel& noise, const Proposal& q, int n,
                         const QuadratureSpec& spec);
/// (1/N) integral s^2/q: the variance added by noisy evaluations.
double noise_variance_term(const NoiseModel& noise, const Proposal& q, int n,
                           const QuadratureSpec& spec);
/// (1/N) (integral m^2/q - Z_bar^2): variance of the exact-evaluation estimator.
double classical_is_variance(const NoiseModel& noise, const Proposal& q, int n,
                             const QuadratureSpec& spec);

/// (1/N) [integral sqrt(m^2 + s^2)]^2 - Z_bar^2/N, evaluated as
/// (J - Z_bar)(J + Z_bar)/N with J - Z_bar = integral s^2 / (sqrt(m^2 + s^2) + m)
/// so that small noise does not cancel.
double v_min(const NoiseModel& noise, int n, const QuadratureSpec& spec);

/// (Z_bar/N) integral s^2/m. Throws where s^2 > 0 but m == 0.
double v_sub_opt(const NoiseModel& noise, int n, const QuadratureSpec& spec);

/// Var[E_hat_p] = (1/N) integral f_p^2 (m^2 + s^2)/q - E_p^2/N.
double var_e_component(const NoiseModel& noise, const Proposal& q, const VectorFunction& f,
                       Eigen::Index p, int n, const QuadratureSpec& spec);

/// Var[I_hat_std,p] = (1/(N Z_bar^2)) integral f_p^2 (m^2 + s^2)/q - I_p^2/N.
double var_i_std_component(const NoiseModel& noise, const Proposal& q, const VectorFunction& f,
                           Eigen::Index p, double z_bar, double i_p, int n,
                           const QuadratureSpec& spec);

/// Cov[E_hat_p, Z_hat] = (1/N) integral f_p (m^2 + s^2)/q - E_p Z_bar/N.
double cov_e_z(const NoiseModel& noise, const Proposal& q, const VectorFunction& f,
               Eigen::Index p, double e_p, double z_bar, int n, const QuadratureSpec& spec);

/// Delta-method variance of the p-th self-normalized component in both forms.
struct SelfNormalizedVariance {
  /// Var[E]/Z^2 - 2 E_p Cov[E, Z]/Z^3 + E_p^2 Var[Z]/Z^4.
  double three_term = 0.0;
  /// (1/(N Z^2)) integral (m^2 + s^2)(f_p - I_p)^2 / q.
  double consolidated = 0.0;
};

SelfNormalizedVariance var_i_self_component(const NoiseModel& noise, const Proposal& q,
                                            const VectorFunction& f, Eigen::Index p, int n,
                                            const QuadratureSpec& spec);

VarianceReport variance_report(const NoiseModel& noise, const Proposal& q, int n,
                               const QuadratureSpec& spec);

}  // namespace nis
