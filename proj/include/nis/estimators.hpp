#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

#include "nis/models.hpp"
#include "nis/proposals.hpp"
#include "nis/rng.hpp"

namespace nis {

/// Point estimates from one weighted ensemble.
struct EstimatorReport {
  double z_hat = 0.0;
  /// Present only when Z_bar was supplied.
  std::optional<Eigen::VectorXd> i_std;
  Eigen::VectorXd i_self;
  /// Z estimate from exact evaluations m(x_n)/q(x_n) on the same points.
  double z_noise_free = 0.0;
  Eigen::Index n = 0;
  /// (sum w)^2 / sum w^2, in [1, N].
  double ess_proxy = 0.0;
  Eigen::Index floor_hits = 0;
};

/// Mean and unbiased variance of a sample with standard errors of both. The
/// variance error uses the fourth central moment.
struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;
  double stderr_mean = 0.0;
  double stderr_variance = 0.0;
};

SampleMoments sample_moments(const Eigen::Ref<const Eigen::ArrayXd>& xs);

/// Sample covariance of paired observations with its standard error.
struct SampleCovariance {
  double covariance = 0.0;
  double stderr_covariance = 0.0;
};

SampleCovariance sample_covariance(const Eigen::Ref<const Eigen::ArrayXd>& xs,
                                   const Eigen::Ref<const Eigen::ArrayXd>& ys);

struct ReplicationSummary {
  std::vector<EstimatorReport> per_rep;
  double mean_z = 0.0;
  double var_z = 0.0;
  double stderr_mean_z = 0.0;
  double stderr_var_z = 0.0;
  std::uint64_t base_seed = 0;

  Eigen::ArrayXd z_values() const;
  Eigen::ArrayXd z_noise_free_values() const;
  /// p-th component of I_self per replication.
  Eigen::ArrayXd i_self_values(Eigen::Index p = 0) const;
};

/// Draws x_n ~ q, one realization m~(x_n) each, and weights w_n = m~(x_n)/q(x_n).
/// Throws if q vanishes at a drawn point.
WeightedEnsemble run_noisy_is(const NoiseModel& noise, const Proposal& proposal, int n,
                              Stream& rng);

/// Exact-evaluation weights m(x_n)/q(x_n) on the ensemble's points.
Eigen::ArrayXd noise_free_weights(const NoiseModel& noise, const Proposal& proposal,
                                  const WeightedEnsemble& ens);

double estimate_z(const WeightedEnsemble& ens);
Eigen::VectorXd estimate_i_std(const WeightedEnsemble& ens, const VectorFunction& f, double z_bar);
Eigen::VectorXd estimate_i_self(const WeightedEnsemble& ens, const VectorFunction& f);
double ess_proxy(const WeightedEnsemble& ens);

EstimatorReport summarize(const NoiseModel& noise, const Proposal& proposal,
                          const WeightedEnsemble& ens, const VectorFunction& f,
                          std::optional<double> z_bar = std::nullopt);

struct ReplicationOptions {
  /// Known Z_bar; enables I_std.
  std::optional<double> z_bar;
  /// 0 selects the hardware concurrency.
  int threads = 0;
};

/// M independent runs; replication r uses the stream seeded by base_seed + r.
/// Results are identical for any thread count.
ReplicationSummary replicate(const NoiseModel& noise, const Proposal& proposal,
                             const VectorFunction& f, int n, int m, std::uint64_t base_seed,
                             const ReplicationOptions& options = {});

}  // namespace nis
