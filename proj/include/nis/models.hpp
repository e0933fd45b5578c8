#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>

#include "nis/rng.hpp"

namespace nis {

/// Positive stand-in for a zero realization. Keeps every noisy draw strictly
/// positive; draws equal to this value are counted as floor hits.
inline constexpr double kPositiveFloor = 1e-300;

/// Closed interval [lo, hi] with finite bounds.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double width() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
};

/// Interval with finite lo < hi, otherwise throws.
Interval make_interval(double lo, double hi);

/// Unnormalized scalar density p(x) >= 0 on a finite (possibly truncated) support.
struct TargetFunction {
  std::function<double(double)> eval;
  Interval support;
  std::string name;

  double operator()(double x) const { return eval(x); }
};

TargetFunction uniform_target(double a, double b);
/// Standard normal density truncated to [-half_width, half_width].
TargetFunction gaussian_target(double half_width);

/// Noisy evaluation of a target: mean m(x), variance s(x)^2 and a sampler for
/// one realization. Immutable; `draw` takes the caller's stream.
struct NoiseModel {
  std::function<double(double)> mean;
  std::function<double(double)> variance;
  std::function<double(double, Stream&)> draw;
  TargetFunction target;
  std::string name;

  double sd(double x) const;
  /// sqrt(m(x)^2 + s(x)^2), the second-moment root that drives optimal proposals.
  double rms(double x) const;
};

NoiseModel make_bernoulli_noise(const TargetFunction& target, double p_max);
NoiseModel make_folded_gaussian_noise(const TargetFunction& target, double sigma);
/// p(x) exp(eps), eps ~ N(-sigma(x)^2/2, sigma(x)^2).
NoiseModel make_multiplicative_lognormal_noise(const TargetFunction& target,
                                               std::function<double(double)> sigma_fn);
NoiseModel make_latent_variable_noise(const TargetFunction& target,
                                      std::function<double(double)> gamma_sq_fn, int R);
/// Exact evaluation: draw(x) == mean(x), zero variance.
NoiseModel make_noise_free(const TargetFunction& target);

/// Vector-valued integrand f(x) of fixed length.
struct VectorFunction {
  std::function<Eigen::VectorXd(double)> eval;
  Eigen::Index dim = 1;

  /// Evaluates and checks the output length.
  Eigen::VectorXd operator()(double x) const;
};

VectorFunction identity_function();
VectorFunction constant_function(const Eigen::VectorXd& value);

/// Output of one noisy IS run.
struct WeightedEnsemble {
  Eigen::ArrayXd points;
  Eigen::ArrayXd weights;
  std::string proposal_id;
  std::uint64_t seed = 0;
  /// Number of realizations that hit kPositiveFloor.
  Eigen::Index floor_hits = 0;

  Eigen::Index size() const noexcept { return weights.size(); }
};

}  // namespace nis
