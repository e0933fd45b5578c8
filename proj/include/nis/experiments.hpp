#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nis/models.hpp"
#include "nis/proposals.hpp"
#include "nis/quadrature.hpp"

namespace nis {

enum class ExperimentKind { Uniform, Gaussian };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& text);

/// Noise-level study on a 1D target with multiplicative lognormal noise.
/// Uniform kind: p = 1/(b - a) on [a, b], sigma(x) = A |log x|.
/// Gaussian kind: p = N(0, 1) on [-trunc, trunc], sigma(x) = A sqrt(|x|).
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Uniform;
  double a = 0.1;
  double b = 10.0;
  double trunc = 12.0;
  std::vector<double> a_grid{0.2, 0.4, 0.6, 0.8, 1.0, 1.2};
  int n = 100;
  int m = 5000;
  std::uint64_t base_seed = 1;
  int grid_nodes = kDefaultGridCells;
  int quad_nodes = kDefaultQuadratureNodes;
  /// Use q proportional to p(x) exp(sigma(x)^2) instead of sqrt(m^2 + s^2).
  bool paper_closed_form = false;
  int threads = 0;
};

/// Throws nis::Error naming the violated constraint.
void validate(const ExperimentConfig& cfg);

struct RatioPoint {
  double a = 0.0;
  double v_opt_theory = 0.0;
  double v_subopt_theory = 0.0;
  double ratio_theory = 0.0;
  double v_opt_emp = 0.0;
  double v_subopt_emp = 0.0;
  double ratio_emp = 0.0;
  double stderr_ratio_emp = 0.0;
  double stderr_v_opt_emp = 0.0;
  double stderr_v_subopt_emp = 0.0;
};

struct RatioCurve {
  ExperimentKind kind = ExperimentKind::Uniform;
  std::vector<RatioPoint> points;
  /// Largest relative mass of the optimal shape lost to truncation (gaussian kind).
  double truncation_mass_error = 0.0;
  std::vector<std::string> warnings;
};

/// Everything needed to evaluate one noise level.
struct ExperimentSetup {
  double a = 0.0;
  TargetFunction target;
  NoiseModel noise;
  /// Optimal proposal (or the closed-form variant when configured).
  Proposal q_opt;
  /// Proposal from the normalized target.
  Proposal q_sub;
  QuadratureSpec spec;
};

ExperimentSetup make_setup(const ExperimentConfig& cfg, double a);

/// Noise standard-deviation function sigma(x) of the configured kind.
double noise_sigma(ExperimentKind kind, double a, double x);

/// Seed shared by both arms at the i-th noise level.
std::uint64_t level_seed(std::uint64_t base_seed, std::size_t level);

/// Theory columns only; the empirical columns stay zero.
RatioPoint theoretical_point(const ExperimentConfig& cfg, double a);

RatioCurve run_uniform_experiment(const ExperimentConfig& cfg);
RatioCurve run_gaussian_experiment(const ExperimentConfig& cfg);
RatioCurve run_experiment(const ExperimentConfig& cfg);

/// Wide table: x, p, then q_opt and s for each noise level.
struct ProposalCurveTable {
  std::vector<double> x;
  std::vector<double> p;
  std::vector<double> levels;
  std::vector<std::vector<double>> q_opt;
  std::vector<std::vector<double>> s;
};

/// Curves on a `points`-point plotting grid. The gaussian grid is exactly
/// symmetric about 0; the uniform grid has its node nearest to x = 1 moved
/// onto 1, where the noise vanishes.
ProposalCurveTable emit_proposal_curves(const ExperimentConfig& cfg,
                                        const std::vector<double>& levels, int points = 1000);

/// Column header label for a noise level, e.g. "0.6".
std::string level_label(double a);

void write_ratio_csv(std::ostream& os, const RatioCurve& curve);
void write_proposal_curves_csv(std::ostream& os, const ProposalCurveTable& table);
nlohmann::json config_json(const ExperimentConfig& cfg);
nlohmann::json ratio_curve_json(const ExperimentConfig& cfg, const RatioCurve& curve);

}  // namespace nis
