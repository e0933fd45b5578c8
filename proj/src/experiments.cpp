#include "nis/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "nis/csv.hpp"
#include "nis/error.hpp"
#include "nis/estimators.hpp"
#include "nis/variance.hpp"

namespace nis {

std::string to_string(ExperimentKind kind) {
  return kind == ExperimentKind::Uniform ? "uniform" : "gaussian";
}

ExperimentKind parse_experiment_kind(const std::string& text) {
  if (text == "uniform") return ExperimentKind::Uniform;
  if (text == "gaussian") return ExperimentKind::Gaussian;
  throw Error("experiments", "unknown experiment kind '" + text + "' (uniform|gaussian)");
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.kind == ExperimentKind::Uniform && !(cfg.a < cfg.b))
    throw Error("experiments", "interval bounds require a < b");
  if (cfg.kind == ExperimentKind::Uniform && !(cfg.a > 0.0))
    throw Error("experiments", "uniform experiment requires a > 0 (sigma uses log x)");
  if (cfg.kind == ExperimentKind::Gaussian && !(cfg.trunc > 0.0))
    throw Error("experiments", "truncation half-width requires trunc > 0");
  if (cfg.a_grid.empty()) throw Error("experiments", "noise grid is empty");
  for (double a : cfg.a_grid)
    if (!(a > 0.0) || !std::isfinite(a))
      throw Error("experiments", "noise level requires A > 0, got " + csv::real(a));
  if (cfg.n < 2) throw Error("experiments", "requires N >= 2");
  if (cfg.m < 2) throw Error("experiments", "requires M >= 2");
  if (cfg.grid_nodes < 2) throw Error("experiments", "requires grid-nodes >= 2");
  if (cfg.quad_nodes < 3 || cfg.quad_nodes % 2 == 0)
    throw Error("experiments", "requires odd quad-nodes >= 3");
}

double noise_sigma(ExperimentKind kind, double a, double x) {
  return kind == ExperimentKind::Uniform ? a * std::abs(std::log(x)) : a * std::sqrt(std::abs(x));
}

std::uint64_t level_seed(std::uint64_t base_seed, std::size_t level) {
  return base_seed + (static_cast<std::uint64_t>(level) << 32);
}

ExperimentSetup make_setup(const ExperimentConfig& cfg, double a) {
  const ExperimentKind kind = cfg.kind;
  TargetFunction target =
      kind == ExperimentKind::Uniform ? uniform_target(cfg.a, cfg.b) : gaussian_target(cfg.trunc);
  NoiseModel noise = make_multiplicative_lognormal_noise(
      target, [kind, a](double x) { return noise_sigma(kind, a, x); });
  const Interval support = target.support;
  Proposal q_opt =
      cfg.paper_closed_form
          ? build_proposal_from_shape(
                [&](double x) {
                  const double s = noise_sigma(kind, a, x);
                  return target(x) * std::exp(s * s);
                },
                support, cfg.grid_nodes, "closed-form")
          : optimal_proposal_for_z(noise, support, cfg.grid_nodes);
  Proposal q_sub = build_proposal_from_shape(target.eval, support, cfg.grid_nodes, "target");
  return {a, target, noise, std::move(q_opt), std::move(q_sub), quadrature_spec(support, cfg.quad_nodes)};
}

namespace {

RatioPoint theory_for(const ExperimentConfig& cfg, const ExperimentSetup& setup) {
  RatioPoint pt;
  pt.a = setup.a;
  pt.v_opt_theory = cfg.paper_closed_form ? var_z_theoretical(setup.noise, setup.q_opt, cfg.n, setup.spec)
                                          : v_min(setup.noise, cfg.n, setup.spec);
  pt.v_subopt_theory = v_sub_opt(setup.noise, cfg.n, setup.spec);
  pt.ratio_theory = pt.v_opt_theory > 0.0 ? pt.v_subopt_theory / pt.v_opt_theory : 1.0;
  return pt;
}

/// Relative mass of the optimal shape outside [-c, c], from quadrature on
/// [-c, c] and [-2c, 2c].
double truncation_error(const ExperimentConfig& cfg, const ExperimentSetup& setup) {
  const double c = cfg.trunc;
  auto shape = [&](double x) {
    const double p = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    const double s = noise_sigma(cfg.kind, setup.a, x);
    const double factor = cfg.paper_closed_form ? std::exp(s * s) : std::exp(0.5 * s * s);
    return p * factor;
  };
  const double inner = integrate<double>(shape, -c, c, cfg.quad_nodes, QuadratureRule::Simpson);
  const double outer =
      integrate<double>(shape, -2.0 * c, 2.0 * c, 2 * (cfg.quad_nodes - 1) + 1, QuadratureRule::Simpson);
  return std::abs(outer - inner) / outer;
}

RatioCurve run(const ExperimentConfig& cfg) {
  validate(cfg);
  RatioCurve curve;
  curve.kind = cfg.kind;
  const VectorFunction unit = constant_function(Eigen::VectorXd::Ones(1));
  for (std::size_t i = 0; i < cfg.a_grid.size(); ++i) {
    const double a = cfg.a_grid[i];
    try {
      const ExperimentSetup setup = make_setup(cfg, a);
      RatioPoint pt = theory_for(cfg, setup);

      // Both arms share the level seed: common random numbers.
      const std::uint64_t seed = level_seed(cfg.base_seed, i);
      const ReplicationOptions opts{std::nullopt, cfg.threads};
      const ReplicationSummary opt = replicate(setup.noise, setup.q_opt, unit, cfg.n, cfg.m, seed, opts);
      const ReplicationSummary sub = replicate(setup.noise, setup.q_sub, unit, cfg.n, cfg.m, seed, opts);
      pt.v_opt_emp = opt.var_z;
      pt.v_subopt_emp = sub.var_z;
      pt.stderr_v_opt_emp = opt.stderr_var_z;
      pt.stderr_v_subopt_emp = sub.stderr_var_z;
      pt.ratio_emp = opt.var_z > 0.0 ? sub.var_z / opt.var_z : 0.0;
      const double rel_opt = opt.var_z > 0.0 ? opt.stderr_var_z / opt.var_z : 0.0;
      const double rel_sub = sub.var_z > 0.0 ? sub.stderr_var_z / sub.var_z : 0.0;
      pt.stderr_ratio_emp = pt.ratio_emp * std::sqrt(rel_opt * rel_opt + rel_sub * rel_sub);
      curve.points.push_back(pt);

      if (cfg.kind == ExperimentKind::Gaussian) {
        const double err = truncation_error(cfg, setup);
        curve.truncation_mass_error = std::max(curve.truncation_mass_error, err);
        if (err > 1e-8)
          curve.warnings.push_back("truncation mass error " + csv::real(err) + " at A = " +
                                   level_label(a) + " exceeds 1e-8");
      }
    } catch (const Error& e) {
      throw Error("experiments", "A = " + level_label(a) + ": " + e.what());
    }
  }
  return curve;
}

}  // namespace

RatioPoint theoretical_point(const ExperimentConfig& cfg, double a) {
  return theory_for(cfg, make_setup(cfg, a));
}

RatioCurve run_uniform_experiment(const ExperimentConfig& cfg) {
  if (cfg.kind != ExperimentKind::Uniform)
    throw Error("experiments", "run_uniform_experiment needs kind = uniform");
  return run(cfg);
}

RatioCurve run_gaussian_experiment(const ExperimentConfig& cfg) {
  if (cfg.kind != ExperimentKind::Gaussian)
    throw Error("experiments", "run_gaussian_experiment needs kind = gaussian");
  return run(cfg);
}

RatioCurve run_experiment(const ExperimentConfig& cfg) {
  return cfg.kind == ExperimentKind::Uniform ? run_uniform_experiment(cfg)
                                             : run_gaussian_experiment(cfg);
}

std::string level_label(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", a);
  return buf;
}

ProposalCurveTable emit_proposal_curves(const ExperimentConfig& cfg,
                                        const std::vector<double>& levels, int points) {
  ExperimentConfig checked = cfg;
  checked.a_grid = levels;
  validate(checked);
  if (points < 2) throw Error("experiments", "plotting grid needs at least 2 points");

  ProposalCurveTable table;
  table.levels = levels;
  const ExperimentSetup base = make_setup(cfg, levels.front());
  const Interval s = base.target.support;
  const double mid = 0.5 * (s.lo + s.hi);
  const double half = 0.5 * s.width();
  table.x.resize(points);
  for (int i = 0; i < points; ++i) {
    const double t = static_cast<double>(2 * i - (points - 1)) / (points - 1);
    table.x[i] = i == 0 ? s.lo : i == points - 1 ? s.hi : mid + half * t;
  }
  if (cfg.kind == ExperimentKind::Uniform && s.contains(1.0)) {
    std::size_t nearest = 0;
    for (std::size_t i = 1; i < table.x.size(); ++i)
      if (std::abs(table.x[i] - 1.0) < std::abs(table.x[nearest] - 1.0)) nearest = i;
    table.x[nearest] = 1.0;
  }

  table.p.reserve(points);
  for (double x : table.x) table.p.push_back(base.q_sub.density(x));
  for (double a : levels) {
    const ExperimentSetup setup = make_setup(cfg, a);
    std::vector<double> q(points), sd(points);
    for (int i = 0; i < points; ++i) {
      q[i] = setup.q_opt.density(table.x[i]);
      sd[i] = setup.noise.sd(table.x[i]);
    }
    table.q_opt.push_back(std::move(q));
    table.s.push_back(std::move(sd));
  }
  return table;
}

void write_ratio_csv(std::ostream& os, const RatioCurve& curve) {
  csv::write_row(os, {"A", "v_opt_theory", "v_subopt_theory", "ratio_theory", "v_opt_emp",
                      "v_subopt_emp", "ratio_emp", "stderr_ratio_emp"});
  for (const RatioPoint& p : curve.points) {
    csv::write_row(os, {csv::real(p.a), csv::real(p.v_opt_theory), csv::real(p.v_subopt_theory),
                        csv::real(p.ratio_theory), csv::real(p.v_opt_emp), csv::real(p.v_subopt_emp),
                        csv::real(p.ratio_emp), csv::real(p.stderr_ratio_emp)});
  }
}

void write_proposal_curves_csv(std::ostream& os, const ProposalCurveTable& table) {
  std::vector<std::string> header{"x", "p"};
  for (double a : table.levels) {
    header.push_back("q_opt_" + level_label(a));
    header.push_back("s_" + level_label(a));
  }
  csv::write_row(os, header);
  for (std::size_t i = 0; i < table.x.size(); ++i) {
    std::vector<std::string> row{csv::real(table.x[i]), csv::real(table.p[i])};
    for (std::size_t k = 0; k < table.levels.size(); ++k) {
      row.push_back(csv::real(table.q_opt[k][i]));
      row.push_back(csv::real(table.s[k][i]));
    }
    csv::write_row(os, row);
  }
}

nlohmann::json config_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["kind"] = to_string(cfg.kind);
  if (cfg.kind == ExperimentKind::Uniform) {
    j["a"] = cfg.a;
    j["b"] = cfg.b;
  } else {
    j["trunc"] = cfg.trunc;
  }
  j["A"] = cfg.a_grid;
  j["N"] = cfg.n;
  j["M"] = cfg.m;
  j["seed"] = cfg.base_seed;
  j["grid_nodes"] = cfg.grid_nodes;
  j["quad_nodes"] = cfg.quad_nodes;
  j["paper_closed_form"] = cfg.paper_closed_form;
  return j;
}

nlohmann::json ratio_curve_json(const ExperimentConfig& cfg, const RatioCurve& curve) {
  nlohmann::json j;
  j["config"] = config_json(cfg);
  nlohmann::json seeds = nlohmann::json::array();
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const RatioPoint& p = curve.points[i];
    seeds.push_back(level_seed(cfg.base_seed, i));
    rows.push_back({{"A", p.a},
                    {"v_opt_theory", p.v_opt_theory},
                    {"v_subopt_theory", p.v_subopt_theory},
                    {"ratio_theory", p.ratio_theory},
                    {"v_opt_emp", p.v_opt_emp},
                    {"v_subopt_emp", p.v_subopt_emp},
                    {"ratio_emp", p.ratio_emp},
                    {"stderr_ratio_emp", p.stderr_ratio_emp},
                    {"stderr_v_opt_emp", p.stderr_v_opt_emp},
                    {"stderr_v_subopt_emp", p.stderr_v_subopt_emp}});
  }
  j["level_seeds"] = seeds;
  j["points"] = rows;
  if (cfg.kind == ExperimentKind::Gaussian) j["truncation_mass_error"] = curve.truncation_mass_error;
  j["warnings"] = curve.warnings;
  return j;
}

}  // namespace nis
