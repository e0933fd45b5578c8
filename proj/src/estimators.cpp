#include "nis/estimators.hpp"

#include <cmath>
#include <sstream>

#include "nis/error.hpp"
#include "nis/parallel.hpp"

namespace nis {

SampleMoments sample_moments(const Eigen::Ref<const Eigen::ArrayXd>& xs) {
  const auto m = static_cast<double>(xs.size());
  if (xs.size() < 2) throw Error("estimators", "sample moments need at least 2 observations");
  SampleMoments out;
  out.mean = xs.mean();
  const Eigen::ArrayXd d = xs - out.mean;
  const double m2 = d.square().mean();
  const double m4 = d.square().square().mean();
  out.variance = m2 * m / (m - 1.0);
  out.stderr_mean = std::sqrt(out.variance / m);
  const double var_of_var = (m4 - (m - 3.0) / (m - 1.0) * m2 * m2) / m;
  out.stderr_variance = std::sqrt(std::max(0.0, var_of_var));
  return out;
}

SampleCovariance sample_covariance(const Eigen::Ref<const Eigen::ArrayXd>& xs,
                                   const Eigen::Ref<const Eigen::ArrayXd>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw Error("estimators", "covariance needs two samples of equal length >= 2");
  const auto m = static_cast<double>(xs.size());
  const Eigen::ArrayXd products = (xs - xs.mean()) * (ys - ys.mean());
  SampleCovariance out;
  out.covariance = products.sum() / (m - 1.0);
  const double spread = (products - products.mean()).square().sum() / (m - 1.0);
  out.stderr_covariance = std::sqrt(spread / m);
  return out;
}

Eigen::ArrayXd ReplicationSummary::z_values() const {
  Eigen::ArrayXd out(static_cast<Eigen::Index>(per_rep.size()));
  for (std::size_t i = 0; i < per_rep.size(); ++i) out[static_cast<Eigen::Index>(i)] = per_rep[i].z_hat;
  return out;
}

Eigen::ArrayXd ReplicationSummary::z_noise_free_values() const {
  Eigen::ArrayXd out(static_cast<Eigen::Index>(per_rep.size()));
  for (std::size_t i = 0; i < per_rep.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = per_rep[i].z_noise_free;
  return out;
}

Eigen::ArrayXd ReplicationSummary::i_self_values(Eigen::Index p) const {
  Eigen::ArrayXd out(static_cast<Eigen::Index>(per_rep.size()));
  for (std::size_t i = 0; i < per_rep.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = per_rep[i].i_self[p];
  return out;
}

WeightedEnsemble run_noisy_is(const NoiseModel& noise, const Proposal& proposal, int n,
                              Stream& rng) {
  if (n < 1) throw Error("estimators", "N must be >= 1, got " + std::to_string(n));
  WeightedEnsemble ens;
  ens.points.resize(n);
  ens.weights.resize(n);
  ens.proposal_id = proposal.id();
  for (int i = 0; i < n; ++i) {
    const double x = proposal.sample(rng);
    const double qx = proposal.density(x);
    if (!(qx > 0.0)) {
      std::ostringstream os;
      os.precision(17);
      os << "proposal '" << proposal.id() << "' has zero density at drawn point x = " << x;
      throw Error("estimators", os.str());
    }
    const double realization = noise.draw(x, rng);
    if (realization == kPositiveFloor) ++ens.floor_hits;
    ens.points[i] = x;
    ens.weights[i] = realization / qx;
  }
  return ens;
}

Eigen::ArrayXd noise_free_weights(const NoiseModel& noise, const Proposal& proposal,
                                  const WeightedEnsemble& ens) {
  return ens.points.unaryExpr(
      [&](double x) { return noise.mean(x) / proposal.density(x); });
}

double estimate_z(const WeightedEnsemble& ens) {
  if (ens.size() == 0) throw Error("estimators", "empty ensemble");
  return ens.weights.mean();
}

namespace {

Eigen::VectorXd weighted_sum(const WeightedEnsemble& ens, const VectorFunction& f) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(f.dim);
  for (Eigen::Index i = 0; i < ens.size(); ++i) acc += ens.weights[i] * f(ens.points[i]);
  return acc;
}

}  // namespace

Eigen::VectorXd estimate_i_std(const WeightedEnsemble& ens, const VectorFunction& f, double z_bar) {
  if (!(z_bar > 0.0)) throw Error("estimators", "I_std requires Z_bar > 0");
  if (ens.size() == 0) throw Error("estimators", "empty ensemble");
  return weighted_sum(ens, f) / (static_cast<double>(ens.size()) * z_bar);
}

Eigen::VectorXd estimate_i_self(const WeightedEnsemble& ens, const VectorFunction& f) {
  const double total = ens.weights.sum();
  if (!(total > 0.0)) throw Error("estimators", "I_self undefined: weight sum is zero");
  return weighted_sum(ens, f) / total;
}

double ess_proxy(const WeightedEnsemble& ens) {
  const double sum_sq = ens.weights.square().sum();
  if (!(sum_sq > 0.0)) return 0.0;
  const double total = ens.weights.sum();
  return total * total / sum_sq;
}

EstimatorReport summarize(const NoiseModel& noise, const Proposal& proposal,
                          const WeightedEnsemble& ens, const VectorFunction& f,
                          std::optional<double> z_bar) {
  EstimatorReport r;
  r.n = ens.size();
  r.z_hat = estimate_z(ens);
  if (z_bar) r.i_std = estimate_i_std(ens, f, *z_bar);
  r.i_self = ens.weights.sum() > 0.0 ? estimate_i_self(ens, f)
                                      : Eigen::VectorXd::Constant(f.dim, std::nan(""));
  r.z_noise_free = noise_free_weights(noise, proposal, ens).mean();
  r.ess_proxy = ess_proxy(ens);
  r.floor_hits = ens.floor_hits;
  return r;
}

ReplicationSummary replicate(const NoiseModel& noise, const Proposal& proposal,
                             const VectorFunction& f, int n, int m, std::uint64_t base_seed,
                             const ReplicationOptions& options) {
  if (m < 2) throw Error("estimators", "replication count M must be >= 2, got " + std::to_string(m));
  if (n < 1) throw Error("estimators", "N must be >= 1, got " + std::to_string(n));
  ReplicationSummary out;
  out.base_seed = base_seed;
  out.per_rep.resize(static_cast<std::size_t>(m));
  parallel_for(
      static_cast<std::size_t>(m), options.threads,
      [&](std::size_t r) {
        const std::uint64_t seed = base_seed + r;
        Stream rng = make_stream(seed);
        WeightedEnsemble ens = run_noisy_is(noise, proposal, n, rng);
        ens.seed = seed;
        out.per_rep[r] = summarize(noise, proposal, ens, f, options.z_bar);
      },
      [](std::size_t index, const std::exception_ptr& error) {
        try {
          std::rethrow_exception(error);
        } catch (const std::exception& e) {
          throw Error("estimators", "replication " + std::to_string(index) + " failed: " + e.what());
        }
      });
  const SampleMoments z = sample_moments(out.z_values());
  out.mean_z = z.mean;
  out.var_z = z.variance;
  out.stderr_mean_z = z.stderr_mean;
  out.stderr_var_z = z.stderr_variance;
  return out;
}

}  // namespace nis
