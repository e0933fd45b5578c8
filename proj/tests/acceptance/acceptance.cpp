// Acceptance suite. Prints one "[PASS]" or "[FAIL]" line per criterion.
//
//   nis_acceptance <path-to-nis-cli> [criterion ...]
//
// Without criterion numbers all twelve run. Exit status is 1 if any fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "nis/csv.hpp"
#include "nis/estimators.hpp"
#include "nis/experiments.hpp"
#include "nis/variance.hpp"
#include "test_support.hpp"

using namespace nis;
using nis::testing::random_mixture_proposal;
using nis::testing::rel_diff;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " FAILED{" << what << "}";
    }
  }
};

std::string cli_path;

const Interval kUniform{0.1, 10.0};
const std::vector<double> kGrid{0.2, 0.4, 0.6, 0.8, 1.0, 1.2};

NoiseModel uniform_noise(double A) {
  return make_multiplicative_lognormal_noise(uniform_target(0.1, 10.0),
                                             [A](double x) { return A * std::abs(std::log(x)); });
}

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// 1. Normalizing constant of the uniform experiment.
void normalization(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  const double z = normalizing_constant(uniform_noise(0.6), quadrature_spec(kUniform));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.detail << "Z_bar = " << csv::real(z) << ", |Z_bar - 1| = " << g(std::abs(z - 1.0)) << ", " << g(seconds) << " s";
  o.require(std::abs(z - 1.0) <= 1e-12, "|Z_bar - 1| <= 1e-12");
  o.require(seconds < 1.0, "runtime < 1 s");
}

// 2. Unbiasedness of Z_hat for each noise model.
void unbiasedness(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  const TargetFunction target = uniform_target(0.1, 10.0);
  const Proposal q = build_proposal_from_shape(target.eval, kUniform);
  // Bernoulli with p_max = 2 sup p so that realizations actually vary.
  const NoiseModel models[] = {
      make_bernoulli_noise(target, 2.0 / 9.9),
      make_folded_gaussian_noise(target, 0.05),
      make_multiplicative_lognormal_noise(target, [](double x) { return 0.6 * std::abs(std::log(x)); }),
      make_latent_variable_noise(target, [](double x) { return 0.5 * (1.0 + std::abs(std::log(x))); }, 2),
  };
  std::uint64_t seed = 1000;
  for (const NoiseModel& noise : models) {
    const ReplicationSummary s = replicate(noise, q, identity_function(), 200, 2000, seed);
    seed += 1u << 20;
    // Z_bar is the integral of m, which differs from 1 when m != p (folded).
    const double z_bar = normalizing_constant(noise, quadrature_spec(kUniform));
    const double zs = std::abs(s.mean_z - z_bar) / s.stderr_mean_z;
    o.detail << noise.name << ": mean " << g(s.mean_z) << " vs Z_bar " << g(z_bar) << " (" << g(zs) << " SE); ";
    o.require(zs <= 3.0, noise.name + " within 3 SE");
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.detail << g(seconds) << " s";
  o.require(seconds < 30.0, "runtime < 30 s");
}

// 3. Noisy variance dominates the exact-evaluation variance on the same draws.
void variance_inflation(Outcome& o) {
  for (double A : {0.2, 0.6, 1.2}) {
    const NoiseModel noise = uniform_noise(A);
    const Proposal q = optimal_proposal_for_z(noise, kUniform);
    const ReplicationSummary s = replicate(noise, q, identity_function(), 100, 5000, 31);
    const double noise_free = sample_moments(s.z_noise_free_values()).variance;
    o.detail << "A=" << A << ": " << g(s.var_z) << " >= " << g(noise_free) << "; ";
    o.require(s.var_z >= noise_free, "A = " + g(A));
  }
}

// 4. Var[Z_hat] splits into the noise term and the classical IS variance.
void decomposition(Outcome& o) {
  Stream rng = make_stream(404);
  const TargetFunction gauss = gaussian_target(6.0);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double level = 0.1 + uniform01(rng);
    NoiseModel noise;
    switch (k % 4) {
      case 0: noise = uniform_noise(level); break;
      case 1: noise = make_folded_gaussian_noise(gauss, 0.05 * level); break;
      case 2: noise = make_bernoulli_noise(gauss, (1.0 + level) * gauss(0.0)); break;
      default: noise = make_latent_variable_noise(gauss, [level](double x) { return level * (1.0 + x * x); }, 3); break;
    }
    const QuadratureSpec spec = quadrature_spec(noise.target.support);
    const Proposal q = random_mixture_proposal(noise.target.support, rng);
    const double total = var_z_theoretical(noise, q, 100, spec);
    const double split = noise_variance_term(noise, q, 100, spec) + classical_is_variance(noise, q, 100, spec);
    worst = std::max(worst, rel_diff(total, split));
  }
  o.detail << "max relative difference " << g(worst) << " over 10 pairs";
  o.require(worst <= 1e-8, "relative difference <= 1e-8");
}

// 5. Without noise the minimum variance is zero.
void vmin_degenerate(Outcome& o) {
  const TargetFunction targets[] = {uniform_target(0.1, 10.0), gaussian_target(12.0),
                                    TargetFunction{[](double x) { return 1.0 + std::sin(x); }, {0.0, 6.0}, "wave"}};
  // A = 0 makes the lognormal factor exactly one.
  double worst = v_min(uniform_noise(0.0), 100, quadrature_spec(kUniform));
  for (const TargetFunction& t : targets)
    worst = std::max(worst, v_min(make_noise_free(t), 100, quadrature_spec(t.support)));
  o.detail << "max V_min = " << g(worst);
  o.require(worst <= 1e-10, "V_min <= 1e-10");
}

// 6. No proposal beats V_min.
void jensen(Outcome& o) {
  Stream rng = make_stream(606);
  int checked = 0;
  double slack = INFINITY;
  for (ExperimentKind kind : {ExperimentKind::Uniform, ExperimentKind::Gaussian}) {
    ExperimentConfig cfg;
    cfg.kind = kind;
    for (double A : kGrid) {
      const ExperimentSetup s = make_setup(cfg, A);
      const double floor = v_min(s.noise, cfg.n, s.spec);
      for (int k = 0; k < 20; ++k) {
        const Proposal q = random_mixture_proposal(s.noise.target.support, rng);
        const double v = var_z_theoretical(s.noise, q, cfg.n, s.spec);
        slack = std::min(slack, v - floor);
        ++checked;
        if (v < floor - 1e-9) o.require(false, to_string(kind) + " A = " + g(A));
      }
    }
  }
  o.detail << checked << " proposals, min(V_q - V_min) = " << g(slack);
}

// 7. Ratio curves: theory >= 1, non-decreasing, empirical within 15%.
void ratio_curves(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  for (ExperimentKind kind : {ExperimentKind::Uniform, ExperimentKind::Gaussian}) {
    ExperimentConfig cfg;
    cfg.kind = kind;
    cfg.a_grid = kGrid;
    const RatioCurve c = run_experiment(cfg);
    double previous = 1.0;
    o.detail << to_string(kind) << ":";
    for (const RatioPoint& p : c.points) {
      const std::string at = to_string(kind) + " A = " + g(p.a);
      o.detail << " A=" << p.a << " theory " << g(p.ratio_theory) << " emp " << g(p.ratio_emp) << " (SE "
               << g(p.stderr_ratio_emp) << ");";
      o.require(p.ratio_theory >= 1.0, at + " ratio_theory >= 1");
      o.require(p.ratio_theory >= previous, at + " non-decreasing");
      o.require(std::abs(p.ratio_emp / p.ratio_theory - 1.0) <= 0.15, at + " empirical within 15%");
      previous = p.ratio_theory;
    }
    o.detail << " ";
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.detail << g(seconds) << " s";
  o.require(seconds < 300.0, "runtime < 5 min");
}

struct Arm {
  double var = 0.0;
  double se = 0.0;
};

Arm empirical(const NoiseModel& noise, const Proposal& q, int n, int m, std::uint64_t seed) {
  const ReplicationSummary s = replicate(noise, q, identity_function(), n, m, seed);
  return {s.var_z, s.stderr_var_z};
}

// 8. Optimal shapes against alternative closed forms.
void closed_form_study(Outcome& o) {
  {
    const double A = 1.2;
    const NoiseModel noise = uniform_noise(A);
    const Proposal generic = optimal_proposal_for_z(noise, kUniform);
    const Proposal closed = build_proposal_from_shape(
        [&](double x) {
          const double s = A * std::log(x);
          return std::exp(s * s) / 9.9;
        },
        kUniform, kDefaultGridCells, "closed-form");
    const Arm a = empirical(noise, generic, 100, 10000, 808);
    const Arm b = empirical(noise, closed, 100, 10000, 808);
    const QuadratureSpec spec = quadrature_spec(kUniform);
    o.detail << "uniform A=1.2: generic " << g(a.var) << " (SE " << g(a.se) << ", theory "
             << g(var_z_theoretical(noise, generic, 100, spec)) << ") vs closed-form " << g(b.var) << " (SE " << g(b.se)
             << ", theory " << g(var_z_theoretical(noise, closed, 100, spec)) << "); ";
    o.require(a.var <= b.var + 2.0 * std::hypot(a.se, b.se), "uniform generic <= closed-form + 2 SE");
  }
  {
    const TargetFunction target = gaussian_target(3.0);
    const double p_max = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    const NoiseModel noise = make_bernoulli_noise(target, p_max);
    const Proposal generic = optimal_proposal_for_z(noise, target.support);
    const Proposal closed = build_proposal_from_shape(
        [&](double x) {
          const double p = target(x);
          return p * std::sqrt(1.0 + (p_max - p) * (p_max - p));
        },
        target.support, kDefaultGridCells, "closed-form");
    const Arm a = empirical(noise, generic, 100, 10000, 909);
    const Arm b = empirical(noise, closed, 100, 10000, 909);
    const QuadratureSpec spec = quadrature_spec(target.support);
    o.detail << "bernoulli: generic " << g(a.var) << " (SE " << g(a.se) << ", theory "
             << g(var_z_theoretical(noise, generic, 100, spec)) << ") vs closed-form " << g(b.var) << " (SE " << g(b.se)
             << ", theory " << g(var_z_theoretical(noise, closed, 100, spec)) << ")";
    o.require(a.var <= b.var + 2.0 * std::hypot(a.se, b.se), "bernoulli generic <= closed-form + 2 SE");
  }
}

// 9. Covariance of E_hat and Z_hat from single-sample runs.
void covariance(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  const NoiseModel noise = uniform_noise(0.6);
  const Proposal q = build_proposal_from_shape(noise.target.eval, kUniform);
  const QuadratureSpec spec = quadrature_spec(kUniform);
  const VectorFunction f = identity_function();
  ReplicationOptions opts;
  opts.z_bar = 1.0;  // With Z_bar = 1 and N = 1, I_std is E_hat.
  const ReplicationSummary s = replicate(noise, q, f, 1, 1'000'000, 9090, opts);
  Eigen::ArrayXd e(static_cast<Eigen::Index>(s.per_rep.size()));
  for (std::size_t r = 0; r < s.per_rep.size(); ++r) e[static_cast<Eigen::Index>(r)] = (*s.per_rep[r].i_std)[0];
  const SampleCovariance c = sample_covariance(e, s.z_values());
  const double theory = cov_e_z(noise, q, f, 0, moment_integral(noise, f, 0, spec), 1.0, 1, spec);
  const double zs = std::abs(c.covariance - theory) / c.stderr_covariance;
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.detail << "empirical " << g(c.covariance) << " (SE " << g(c.stderr_covariance) << ") vs " << g(theory) << ", "
           << g(zs) << " SE, " << g(seconds) << " s";
  o.require(zs <= 3.0, "within 3 SE");
  o.require(seconds < 60.0, "runtime < 1 min");
}

// 10. Delta-method variance of the self-normalized estimator.
void delta_method(Outcome& o) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Gaussian;
  const ExperimentSetup s = make_setup(cfg, 0.6);
  const VectorFunction f = identity_function();
  const SelfNormalizedVariance v = var_i_self_component(s.noise, s.q_sub, f, 0, 1000, s.spec);
  const ReplicationSummary r = replicate(s.noise, s.q_sub, f, 1000, 5000, 1010);
  const SampleMoments m = sample_moments(r.i_self_values());
  const double rel = std::abs(m.variance / v.consolidated - 1.0);
  const double forms = rel_diff(v.three_term, v.consolidated);
  o.detail << "delta " << g(v.consolidated) << " vs empirical " << g(m.variance) << " (SE " << g(m.stderr_variance)
           << "), off by " << g(100 * rel) << "%; forms differ by " << g(forms);
  o.require(rel <= 0.20, "within 20%");
  o.require(forms <= 1e-8, "three-term == consolidated within 1e-8");
}

// 11. Strong noise splits the gaussian optimal proposal into two modes.
void bimodality(Outcome& o) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Gaussian;
  const double A = 1.5;
  const ExperimentSetup s = make_setup(cfg, A);
  const std::vector<double> peaks = local_maxima(s.q_opt);
  const double cell = s.q_opt.grid().step;
  o.detail << peaks.size() << " maxima at";
  for (double x : peaks) o.detail << " " << g(x);
  o.detail << " (expected +/-" << A * A / 2 << ", cell " << g(cell) << ")";
  o.require(peaks.size() == 2, "exactly two maxima");
  if (peaks.size() == 2) {
    o.require(std::abs(peaks[0] + A * A / 2) <= cell, "left mode");
    o.require(std::abs(peaks[1] - A * A / 2) <= cell, "right mode");
  }
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Runs the CLI, returning stdout bytes followed by the --out file bytes.
std::string run_cli(const std::string& args, const std::filesystem::path& dir, int& status) {
  const auto out_file = dir / "out.dat";
  const auto stdout_file = dir / "stdout.dat";
  std::filesystem::remove(out_file);
  const std::string cmd = "\"" + cli_path + "\" " + args + " --out \"" + out_file.string() + "\" > \"" +
                          stdout_file.string() + "\" 2> /dev/null";
  status = std::system(cmd.c_str());
  return slurp(stdout_file) + "\x1f" + slurp(out_file);
}

// 12. CLI output depends on the seed only.
void determinism(Outcome& o) {
  if (cli_path.empty()) {
    o.require(false, "CLI path not given");
    return;
  }
  const auto dir = std::filesystem::temp_directory_path() / "nis_acceptance_cli";
  std::filesystem::create_directories(dir);
  const std::vector<std::string> invocations{
      "experiment --kind uniform --A 0.2,0.8,1.2 --N 50 --M 400 --seed 17",
      "experiment --kind gaussian --A 0.6,1.2 --N 50 --M 400 --seed 17 --format json",
      "variance --kind gaussian --A 0.4,1.5 --seed 17",
      "proposal-curve --kind uniform --A 0.2,1.2 --points 200 --seed 17",
      "estimate --noise bernoulli --proposal optimal-z --N 40 --M 300 --seed 17",
      "estimate --noise latent --proposal optimal-self --N 40 --M 300 --pilot-N 200 --seed 17",
      "estimate --noise folded-gaussian --proposal optimal-std --N 40 --M 300 --seed 17 --format json",
  };
  int count = 0;
  for (const std::string& args : invocations) {
    int status = 0;
    const std::string first = run_cli(args + " --threads 1", dir, status);
    o.require(status == 0, "'" + args + "' exited 0");
    for (const char* threads : {"1", "2", "4"}) {
      int again = 0;
      const std::string repeat = run_cli(args + " --threads " + threads, dir, again);
      o.require(repeat == first, "'" + args + "' identical with --threads " + threads);
    }
    ++count;
  }
  std::filesystem::remove_all(dir);
  o.detail << count << " invocations x 4 runs byte-identical";
}

struct Criterion {
  const char* name;
  std::function<void(Outcome&)> check;
};

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) cli_path = argv[1];
  const std::array<Criterion, 12> criteria{{
      {"normalization oracle", normalization},
      {"unbiasedness", unbiasedness},
      {"variance inflation", variance_inflation},
      {"variance decomposition identity", decomposition},
      {"V_min degenerate case", vmin_degenerate},
      {"Jensen bound", jensen},
      {"ratio curves", ratio_curves},
      {"closed-form discrepancy study", closed_form_study},
      {"E/Z covariance", covariance},
      {"delta-method variance", delta_method},
      {"bimodality", bimodality},
      {"CLI determinism", determinism},
  }};
  std::vector<int> selected;
  for (int i = 2; i < argc; ++i) selected.push_back(std::stoi(argv[i]));
  if (selected.empty())
    for (int k = 1; k <= 12; ++k) selected.push_back(k);

  bool all = true;
  for (int k : selected) {
    if (k < 1 || k > 12) {
      std::cerr << "unknown criterion " << k << '\n';
      return 2;
    }
    Outcome o;
    try {
      criteria[k - 1].check(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    all = all && o.pass;
    std::cout << (o.pass ? "[PASS]" : "[FAIL]") << " criterion " << k << ": " << criteria[k - 1].name << ": "
              << o.detail.str() << std::endl;
  }
  return all ? 0 : 1;
}
