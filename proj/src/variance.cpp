#include "nis/variance.hpp"

#include <cmath>
#include <sstream>

#include "nis/error.hpp"

namespace nis {
namespace {

constexpr double kDensityFloor = 1e-300;

void check_sample_size(int n) {
  if (n < 1) throw Error("variance", "sample size N must be >= 1, got " + std::to_string(n));
}

void check_component(const VectorFunction& f, Eigen::Index p) {
  if (p < 0 || p >= f.dim)
    throw Error("variance", "component index " + std::to_string(p) + " out of range for d_f = " +
                                std::to_string(f.dim));
}

/// numerator / q(x), rejecting a vanishing proposal under positive mass.
double over_density(double numerator, const Proposal& q, double x) {
  if (numerator == 0.0) return 0.0;
  const double qx = q.density(x);
  if (qx < kDensityFloor) {
    std::ostringstream os;
    os.precision(17);
    os << "support mismatch: proposal '" << q.id() << "' density " << qx
       << " vanishes where the integrand is positive (x = " << x << ")";
    throw Error("variance", os.str());
  }
  return numerator / qx;
}

double second_moment(const NoiseModel& noise, double x) {
  const double m = noise.mean(x);
  return m * m + noise.variance(x);
}

}  // namespace

double normalizing_constant(const NoiseModel& noise, const QuadratureSpec& spec) {
  return quadrature([&](double x) { return noise.mean(x); }, spec);
}

double moment_integral(const NoiseModel& noise, const VectorFunction& f, Eigen::Index p,
                       const QuadratureSpec& spec) {
  check_component(f, p);
  return quadrature([&](double x) { return f(x)[p] * noise.mean(x); }, spec);
}

double var_z_theoretical(const NoiseModel& noise, const Proposal& q, int n,
                         const QuadratureSpec& spec) {
  check_sample_size(n);
  const double z_bar = normalizing_constant(noise, spec);
  const double first =
      quadrature([&](double x) { return over_density(second_moment(noise, x), q, x); }, spec);
  return (first - z_bar * z_bar) / n;
}

double noise_variance_term(const NoiseModel& noise, const Proposal& q, int n,
                           const QuadratureSpec& spec) {
  check_sample_size(n);
  return quadrature([&](double x) { return over_density(noise.variance(x), q, x); }, spec) / n;
}

double classical_is_variance(const NoiseModel& noise, const Proposal& q, int n,
                             const QuadratureSpec& spec) {
  check_sample_size(n);
  const double z_bar = normalizing_constant(noise, spec);
  const double first = quadrature(
      [&](double x) {
        const double m = noise.mean(x);
        return over_density(m * m, q, x);
      },
      spec);
  return (first - z_bar * z_bar) / n;
}

double v_min(const NoiseModel& noise, int n, const QuadratureSpec& spec) {
  check_sample_size(n);
  const double z_bar = normalizing_constant(noise, spec);
  const double excess = quadrature(
      [&](double x) {
        const double m = noise.mean(x);
        const double s2 = noise.variance(x);
        if (s2 == 0.0) return 0.0;
        return s2 / (std::sqrt(m * m + s2) + m);
      },
      spec);
  return excess * (excess + 2.0 * z_bar) / n;
}

double v_sub_opt(const NoiseModel& noise, int n, const QuadratureSpec& spec) {
  check_sample_size(n);
  const double z_bar = normalizing_constant(noise, spec);
  const double integral = quadrature(
      [&](double x) {
        const double s2 = noise.variance(x);
        if (s2 == 0.0) return 0.0;
        const double m = noise.mean(x);
        if (!(m > 0.0)) {
          std::ostringstream os;
          os.precision(17);
          os << "s(x)^2 / m(x) undefined: s^2 = " << s2 << " with m = " << m << " at x = " << x;
          throw Error("variance", os.str());
        }
        return s2 / m;
      },
      spec);
  return z_bar * integral / n;
}

double var_e_component(const NoiseModel& noise, const Proposal& q, const VectorFunction& f,
                       Eigen::Index p, int n, const QuadratureSpec& spec) {
  check_sample_size(n);
  check_component(f, p);
  const double e_p = moment_integral(noise, f, p, spec);
  const double first = quadrature(
      [&](double x) {
        const double fp = f(x)[p];
        return over_density(fp * fp * second_moment(noise, x), q, x);
      },
      spec);
  return (first - e_p * e_p) / n;
}

double var_i_std_component(const NoiseModel& noise, const Proposal& q, const VectorFunction& f,
                           Eigen::Index p, double z_bar, double i_p, int n,
                           const QuadratureSpec& spec) {
  check_sample_size(n);
  check_component(f, p);
  if (!(z_bar > 0.0)) throw Error("variance", "Z_bar must be > 0");
  const double first = quadrature(
      [&](double x) {
        const double fp = f(x)[p];
        return over_density(fp * fp * second_moment(noise, x), q, x);
      },
      spec);
  return (first / (z_bar * z_bar) - i_p * i_p) / n;
}

double cov_e_z(const NoiseModel& noise, const Proposal& q, const VectorFunction& f,
               Eigen::Index p, double e_p, double z_bar, int n, const QuadratureSpec& spec) {
  check_sample_size(n);
  check_component(f, p);
  const double first = quadrature(
      [&](double x) { return over_density(f(x)[p] * second_moment(noise, x), q, x); }, spec);
  return (first - e_p * z_bar) / n;
}

SelfNormalizedVariance var_i_self_component(const NoiseModel& noise, const Proposal& q,
                                            const VectorFunction& f, Eigen::Index p, int n,
                                            const QuadratureSpec& spec) {
  check_sample_size(n);
  check_component(f, p);
  const double z_bar = normalizing_constant(noise, spec);
  if (!(z_bar > 0.0)) throw Error("variance", "Z_bar must be > 0");
  const double e_p = moment_integral(noise, f, p, spec);
  const double i_p = e_p / z_bar;

  const double var_e = var_e_component(noise, q, f, p, n, spec);
  const double var_z = var_z_theoretical(noise, q, n, spec);
  const double cov = cov_e_z(noise, q, f, p, e_p, z_bar, n, spec);
  const double z2 = z_bar * z_bar;

  SelfNormalizedVariance out;
  out.three_term = var_e / z2 - 2.0 * e_p * cov / (z2 * z_bar) + e_p * e_p * var_z / (z2 * z2);
  out.consolidated = quadrature(
                         [&](double x) {
                           const double d = f(x)[p] - i_p;
                           return over_density(second_moment(noise, x) * d * d, q, x);
                         },
                         spec) /
                     (n * z2);
  return out;
}

VarianceReport variance_report(const NoiseModel& noise, const Proposal& q, int n,
                               const QuadratureSpec& spec) {
  VarianceReport r;
  r.n = n;
  r.z_bar = normalizing_constant(noise, spec);
  r.v_q = var_z_theoretical(noise, q, n, spec);
  r.v_min = v_min(noise, n, spec);
  r.v_sub_opt = v_sub_opt(noise, n, spec);
  r.ratio = r.v_min > 0.0 ? r.v_sub_opt / r.v_min : 1.0;
  return r;
}

}  // namespace nis
