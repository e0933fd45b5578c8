#include "nis/models.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "nis/error.hpp"

namespace nis {
namespace {

std::string describe(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

double positive_or_floor(double v) { return v > 0.0 ? v : kPositiveFloor; }

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

Interval make_interval(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
    throw Error("models", "interval requires finite lo < hi, got [" + describe(lo) + ", " +
                              describe(hi) + "]");
  return {lo, hi};
}

TargetFunction uniform_target(double a, double b) {
  const Interval support = make_interval(a, b);
  const double height = 1.0 / support.width();
  return {[support, height](double x) { return support.contains(x) ? height : 0.0; }, support,
          "uniform"};
}

TargetFunction gaussian_target(double half_width) {
  if (!(half_width > 0.0)) throw Error("models", "truncation half-width must be > 0");
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  return {[norm](double x) { return norm * std::exp(-0.5 * x * x); },
          make_interval(-half_width, half_width), "gaussian"};
}

double NoiseModel::sd(double x) const { return std::sqrt(variance(x)); }

double NoiseModel::rms(double x) const {
  const double m = mean(x);
  return std::sqrt(m * m + variance(x));
}

NoiseModel make_bernoulli_noise(const TargetFunction& target, double p_max) {
  if (!(p_max > 0.0) || !std::isfinite(p_max))
    throw Error("models", "bernoulli noise requires p_max > 0, got " + describe(p_max));
  auto checked = [target, p_max](double x) {
    const double p = target(x);
    if (p > p_max)
      throw Error("models", "bernoulli noise: p(x) = " + describe(p) + " exceeds p_max = " +
                                describe(p_max) + " at x = " + describe(x));
    return p;
  };
  NoiseModel model;
  model.mean = checked;
  model.variance = [checked, p_max](double x) {
    const double p = checked(x);
    return p * (p_max - p);
  };
  model.draw = [checked, p_max](double x, Stream& rng) {
    const double p = checked(x);
    return uniform01(rng) < p / p_max ? p_max : kPositiveFloor;
  };
  model.target = target;
  model.name = "bernoulli";
  return model;
}

NoiseModel make_folded_gaussian_noise(const TargetFunction& target, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw Error("models", "folded gaussian noise requires sigma > 0, got " + describe(sigma));
  auto mean = [target, sigma](double x) {
    const double p = target(x);
    return sigma * std::sqrt(2.0 / std::numbers::pi) * std::exp(-p * p / (2.0 * sigma * sigma)) +
           p * (1.0 - 2.0 * standard_normal_cdf(-p / sigma));
  };
  NoiseModel model;
  model.mean = mean;
  model.variance = [target, sigma, mean](double x) {
    const double p = target(x);
    const double m = mean(x);
    return std::max(0.0, p * p + sigma * sigma - m * m);
  };
  model.draw = [target, sigma](double x, Stream& rng) {
    return positive_or_floor(std::abs(target(x) + sigma * standard_normal(rng)));
  };
  model.target = target;
  model.name = "folded-gaussian";
  return model;
}

NoiseModel make_multiplicative_lognormal_noise(const TargetFunction& target,
                                               std::function<double(double)> sigma_fn) {
  auto sigma_at = [sigma_fn = std::move(sigma_fn)](double x) {
    const double s = sigma_fn(x);
    if (!(s >= 0.0) || !std::isfinite(s))
      throw Error("models", "multiplicative noise: sigma(x) = " + describe(s) +
                                " is not a finite non-negative value at x = " + describe(x));
    return s;
  };
  NoiseModel model;
  model.mean = [target](double x) { return target(x); };
  model.variance = [target, sigma_at](double x) {
    const double p = target(x);
    const double s = sigma_at(x);
    return p * p * std::expm1(s * s);
  };
  model.draw = [target, sigma_at](double x, Stream& rng) {
    const double s = sigma_at(x);
    const double eps = -0.5 * s * s + s * standard_normal(rng);
    return positive_or_floor(target(x) * std::exp(eps));
  };
  model.target = target;
  model.name = "multiplicative";
  return model;
}

NoiseModel make_latent_variable_noise(const TargetFunction& target,
                                      std::function<double(double)> gamma_sq_fn, int R) {
  if (R < 1) throw Error("models", "latent-variable noise requires R >= 1, got " + std::to_string(R));
  auto log_variance = [gamma_sq_fn = std::move(gamma_sq_fn), R](double x) {
    const double g2 = gamma_sq_fn(x);
    if (!(g2 >= 0.0) || !std::isfinite(g2))
      throw Error("models", "latent-variable noise: gamma^2(x) = " + describe(g2) +
                                " is not a finite non-negative value at x = " + describe(x));
    return g2 / R;
  };
  NoiseModel model;
  model.mean = [target](double x) { return target(x); };
  model.variance = [target, log_variance](double x) {
    const double p = target(x);
    if (p == 0.0) return 0.0;
    return std::expm1(log_variance(x)) * p * p;
  };
  model.draw = [target, log_variance](double x, Stream& rng) {
    const double p = target(x);
    if (p == 0.0) return kPositiveFloor;
    const double v = log_variance(x);
    const double mu = std::log(p) - 0.5 * v;
    return positive_or_floor(std::exp(mu + std::sqrt(v) * standard_normal(rng)));
  };
  model.target = target;
  model.name = "latent";
  return model;
}

NoiseModel make_noise_free(const TargetFunction& target) {
  NoiseModel model;
  model.mean = [target](double x) { return target(x); };
  model.variance = [](double) { return 0.0; };
  model.draw = [target](double x, Stream&) { return target(x); };
  model.target = target;
  model.name = "noise-free";
  return model;
}

Eigen::VectorXd VectorFunction::operator()(double x) const {
  Eigen::VectorXd v = eval(x);
  if (v.size() != dim)
    throw Error("models", "vector function returned length " + std::to_string(v.size()) +
                              ", expected " + std::to_string(dim));
  return v;
}

VectorFunction identity_function() {
  return {[](double x) { return Eigen::VectorXd::Constant(1, x); }, 1};
}

VectorFunction constant_function(const Eigen::VectorXd& value) {
  return {[value](double) { return value; }, value.size()};
}

}  // namespace nis
