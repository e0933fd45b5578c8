#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nis/csv.hpp"
#include "nis/error.hpp"
#include "nis/estimators.hpp"
#include "nis/experiments.hpp"
#include "nis/variance.hpp"

namespace nis::cli {
namespace {

using nlohmann::json;

/// Raised for invalid user input; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  // shared
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
  int threads = 0;
  std::string config;

  // experiment / variance / proposal-curve
  std::string kind = "uniform";
  std::string a_list;
  double a = 0.1;
  double b = 10.0;
  double trunc = 12.0;
  int n = 100;
  int m = 5000;
  int grid_nodes = kDefaultGridCells;
  int quad_nodes = kDefaultQuadratureNodes;
  int points = 1000;
  bool paper_closed_form = false;

  // estimate
  std::string noise = "multiplicative";
  std::string proposal = "target";
  double p_max = 0.0;
  double sigma = 0.05;
  double level = 0.6;
  double gamma_sq = 1.0;
  int r = 1;
  int pilot_n = 1000;
};

std::vector<double> parse_levels(const std::string& text, const std::vector<double>& fallback) {
  if (text.empty()) return fallback;
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw UsageError("--A: '" + item + "' is not a number");
    }
    if (used != item.size()) throw UsageError("--A: '" + item + "' is not a number");
    if (!(v > 0.0) || !std::isfinite(v))
      throw UsageError("--A: noise level must satisfy A > 0, got " + item);
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("--A: empty list");
  return out;
}

/// Turns a JSON config object into flag tokens placed ahead of the user's own
/// flags, so command-line values win (last occurrence wins).
std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("--config: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError("--config: invalid JSON in '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw UsageError("--config: top level must be an object");
  std::vector<std::string> tokens;
  for (const auto& [key, value] : j.items()) {
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) tokens.push_back(flag);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) {
        if (!joined.empty()) joined += ',';
        joined += v.is_string() ? v.get<std::string>() : v.dump();
      }
      tokens.push_back(flag);
      tokens.push_back(joined);
    } else {
      tokens.push_back(flag);
      tokens.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
  }
  return tokens;
}

/// Inserts config-file tokens right after the subcommand name.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  const std::vector<std::string> tokens = config_tokens(path);
  const auto pos = args.empty() ? args.end() : args.begin() + 1;
  args.insert(pos, tokens.begin(), tokens.end());
  return args;
}

ExperimentConfig experiment_config(const Options& o) {
  ExperimentConfig cfg;
  try {
    cfg.kind = parse_experiment_kind(o.kind);
  } catch (const Error& e) {
    throw UsageError(std::string("--kind: ") + e.what());
  }
  cfg.a = o.a;
  cfg.b = o.b;
  cfg.trunc = o.trunc;
  cfg.a_grid = parse_levels(o.a_list, cfg.a_grid);
  cfg.n = o.n;
  cfg.m = o.m;
  cfg.base_seed = o.seed;
  cfg.grid_nodes = o.grid_nodes;
  cfg.quad_nodes = o.quad_nodes;
  cfg.paper_closed_form = o.paper_closed_form;
  cfg.threads = o.threads;
  try {
    validate(cfg);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

/// Writes to --out if set, else to the fallback stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : path_(path), fallback_(fallback) {}

  std::ostream& stream() { return path_.empty() ? fallback_ : buffer_; }

  void commit() {
    if (path_.empty()) return;
    std::ofstream file(path_, std::ios::binary | std::ios::trunc);
    if (!file) throw Error("cli", "cannot open output file '" + path_ + "'");
    file << buffer_.str();
    if (!file) throw Error("cli", "failed writing output file '" + path_ + "'");
  }

 private:
  std::string path_;
  std::ostream& fallback_;
  std::ostringstream buffer_;
};

void check_format(const Options& o) {
  if (o.format != "csv" && o.format != "json")
    throw UsageError("--format must be csv or json, got '" + o.format + "'");
}

void announce(std::ostream& err, const std::string& command, const json& config) {
  err << "# nis " << command << " seed=" << config.value("seed", std::uint64_t{0})
      << " config=" << config.dump() << '\n';
}

int cmd_experiment(const Options& o, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = experiment_config(o);
  announce(err, "experiment", config_json(cfg));
  const RatioCurve curve = run_experiment(cfg);
  for (const auto& w : curve.warnings) err << "warning: " << w << '\n';
  Sink sink(o.out, out);
  if (o.format == "json")
    sink.stream() << ratio_curve_json(cfg, curve).dump(2) << '\n';
  else
    write_ratio_csv(sink.stream(), curve);
  sink.commit();
  return kExitOk;
}

int cmd_proposal_curve(const Options& o, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg = experiment_config(o);
  if (o.points < 2) throw UsageError("--points must be >= 2");
  json config = config_json(cfg);
  config.erase("N");
  config.erase("M");
  config.erase("quad_nodes");
  config["points"] = o.points;
  announce(err, "proposal-curve", config);
  const ProposalCurveTable table = emit_proposal_curves(cfg, cfg.a_grid, o.points);
  Sink sink(o.out, out);
  if (o.format == "json") {
    json j;
    j["config"] = config;
    j["x"] = table.x;
    j["p"] = table.p;
    json curves = json::array();
    for (std::size_t k = 0; k < table.levels.size(); ++k)
      curves.push_back({{"A", table.levels[k]}, {"q_opt", table.q_opt[k]}, {"s", table.s[k]}});
    j["curves"] = curves;
    sink.stream() << j.dump(2) << '\n';
  } else {
    write_proposal_curves_csv(sink.stream(), table);
  }
  sink.commit();
  return kExitOk;
}

int cmd_variance(const Options& o, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = experiment_config(o);
  json config = config_json(cfg);
  config.erase("M");
  announce(err, "variance", config);
  std::vector<VarianceReport> reports;
  for (double a : cfg.a_grid) {
    try {
      const ExperimentSetup setup = make_setup(cfg, a);
      reports.push_back(variance_report(setup.noise, setup.q_opt, cfg.n, setup.spec));
    } catch (const Error& e) {
      throw Error("variance", "A = " + level_label(a) + ": " + e.what());
    }
  }
  Sink sink(o.out, out);
  const std::string experiment = to_string(cfg.kind);
  if (o.format == "json") {
    json rows = json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const VarianceReport& r = reports[i];
      rows.push_back({{"experiment", experiment}, {"A", cfg.a_grid[i]}, {"N", r.n},
                      {"z_bar", r.z_bar}, {"v_q", r.v_q}, {"v_min", r.v_min},
                      {"v_sub_opt", r.v_sub_opt}, {"ratio", r.ratio}});
    }
    sink.stream() << json{{"config", config}, {"rows", rows}}.dump(2) << '\n';
  } else {
    csv::write_row(sink.stream(),
                   {"experiment", "A", "N", "z_bar", "v_q", "v_min", "v_sub_opt", "ratio"});
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const VarianceReport& r = reports[i];
      csv::write_row(sink.stream(),
                     {experiment, csv::real(cfg.a_grid[i]), std::to_string(r.n), csv::real(r.z_bar),
                      csv::real(r.v_q), csv::real(r.v_min), csv::real(r.v_sub_opt),
                      csv::real(r.ratio)});
    }
  }
  sink.commit();
  return kExitOk;
}

/// --p-max, defaulting to the supremum of the configured target.
double resolved_p_max(const Options& o, ExperimentKind kind) {
  if (o.p_max > 0.0) return o.p_max;
  return kind == ExperimentKind::Uniform ? 1.0 / (o.b - o.a)
                                         : 1.0 / std::sqrt(2.0 * std::numbers::pi);
}

NoiseModel estimate_noise(const Options& o, ExperimentKind kind, const TargetFunction& target) {
  if (o.noise == "bernoulli") return make_bernoulli_noise(target, resolved_p_max(o, kind));
  if (o.noise == "folded-gaussian") return make_folded_gaussian_noise(target, o.sigma);
  if (o.noise == "multiplicative") {
    const double level = o.level;
    return make_multiplicative_lognormal_noise(
        target, [kind, level](double x) { return noise_sigma(kind, level, x); });
  }
  if (o.noise == "latent") {
    const double g2 = o.gamma_sq;
    return make_latent_variable_noise(target, [g2](double) { return g2; }, o.r);
  }
  throw UsageError("--noise must be one of bernoulli, folded-gaussian, multiplicative, latent");
}

int cmd_estimate(const Options& o, std::ostream& out, std::ostream& err) {
  ExperimentKind kind{};
  try {
    kind = parse_experiment_kind(o.kind);
  } catch (const Error& e) {
    throw UsageError(std::string("--kind: ") + e.what());
  }
  if (o.n < 1) throw UsageError("--N must be >= 1");
  if (o.m < 2) throw UsageError("--M must be >= 2");
  if (o.grid_nodes < 2) throw UsageError("--grid-nodes must be >= 2");
  if (o.quad_nodes < 3 || o.quad_nodes % 2 == 0) throw UsageError("--quad-nodes must be odd and >= 3");
  if (o.noise == "multiplicative" && !(o.level > 0.0)) throw UsageError("--A: noise level must satisfy A > 0");
  if (o.noise == "latent" && (o.r < 1 || !(o.gamma_sq >= 0.0)))
    throw UsageError("--R must be >= 1 and --gamma-sq >= 0");
  if (o.noise == "folded-gaussian" && !(o.sigma > 0.0)) throw UsageError("--sigma must be > 0");
  if (o.proposal != "target" && o.proposal != "optimal-z" && o.proposal != "optimal-std" &&
      o.proposal != "optimal-self")
    throw UsageError("--proposal must be one of target, optimal-z, optimal-std, optimal-self");

  const TargetFunction target =
      kind == ExperimentKind::Uniform ? uniform_target(o.a, o.b) : gaussian_target(o.trunc);
  const NoiseModel noise = estimate_noise(o, kind, target);
  const Interval support = target.support;
  const QuadratureSpec spec = quadrature_spec(support, o.quad_nodes);
  const VectorFunction f = identity_function();

  json config{{"kind", o.kind}, {"noise", o.noise}, {"proposal", o.proposal},
              {"N", o.n},       {"M", o.m},         {"seed", o.seed},
              {"grid_nodes", o.grid_nodes}, {"quad_nodes", o.quad_nodes}};
  if (kind == ExperimentKind::Uniform) {
    config["a"] = o.a;
    config["b"] = o.b;
  } else {
    config["trunc"] = o.trunc;
  }
  if (o.noise == "bernoulli") config["p_max"] = resolved_p_max(o, kind);
  if (o.noise == "folded-gaussian") config["sigma"] = o.sigma;
  if (o.noise == "multiplicative") config["A"] = o.level;
  if (o.noise == "latent") {
    config["gamma_sq"] = o.gamma_sq;
    config["R"] = o.r;
  }
  // Pilot stream lives in the upper half of the seed space.
  const std::uint64_t pilot_seed = o.seed + (std::uint64_t{1} << 63);
  if (o.proposal == "optimal-self") {
    config["pilot_N"] = o.pilot_n;
    config["pilot_seed"] = pilot_seed;
  }
  announce(err, "estimate", config);

  const double z_bar = normalizing_constant(noise, spec);
  Proposal q = [&]() -> Proposal {
    if (o.proposal == "optimal-z") return optimal_proposal_for_z(noise, support, o.grid_nodes);
    if (o.proposal == "optimal-std") return optimal_proposal_for_std(noise, f, support, o.grid_nodes);
    if (o.proposal == "optimal-self") {
      if (o.pilot_n < 1) throw UsageError("--pilot-N must be >= 1");
      const Proposal pilot_q = optimal_proposal_for_z(noise, support, o.grid_nodes);
      Stream rng = make_stream(pilot_seed);
      const WeightedEnsemble pilot = run_noisy_is(noise, pilot_q, o.pilot_n, rng);
      return optimal_proposal_for_self(noise, f, estimate_i_self(pilot, f), support, o.grid_nodes);
    }
    return build_proposal_from_shape(target.eval, support, o.grid_nodes, "target");
  }();

  const ReplicationSummary summary =
      replicate(noise, q, f, o.n, o.m, o.seed, ReplicationOptions{z_bar, o.threads});

  Sink sink(o.out, out);
  if (o.format == "json") {
    const SampleMoments i_self = sample_moments(summary.i_self_values(0));
    Eigen::Index floor_hits = 0;
    for (const auto& r : summary.per_rep) floor_hits += r.floor_hits;
    json j;
    j["config"] = config;
    j["summary"] = {{"base_seed", summary.base_seed},
                    {"z_bar", z_bar},
                    {"mean_z", summary.mean_z},
                    {"var_z", summary.var_z},
                    {"stderr_mean_z", summary.stderr_mean_z},
                    {"stderr_var_z", summary.stderr_var_z},
                    {"mean_i_self", i_self.mean},
                    {"var_i_self", i_self.variance},
                    {"var_z_theory", var_z_theoretical(noise, q, o.n, spec)},
                    {"floor_hits", floor_hits}};
    sink.stream() << j.dump(2) << '\n';
  } else {
    csv::write_row(sink.stream(), {"rep", "seed", "z_hat", "z_noise_free", "i_std", "i_self",
                                   "ess_proxy", "floor_hits"});
    for (std::size_t r = 0; r < summary.per_rep.size(); ++r) {
      const EstimatorReport& e = summary.per_rep[r];
      csv::write_row(sink.stream(),
                     {std::to_string(r), std::to_string(o.seed + r), csv::real(e.z_hat),
                      csv::real(e.z_noise_free), csv::real((*e.i_std)[0]), csv::real(e.i_self[0]),
                      csv::real(e.ess_proxy), std::to_string(e.floor_hits)});
    }
  }
  sink.commit();
  return kExitOk;
}

void add_shared(CLI::App* sub, Options& o) {
  sub->add_option("--seed", o.seed, "Base 64-bit seed");
  sub->add_option("--out", o.out, "Output path (default: stdout)");
  sub->add_option("--format", o.format, "csv or json");
  sub->add_option("--threads", o.threads, "Worker threads (0 = machine parallelism)");
  sub->add_option("--config", o.config, "JSON file with default flag values");
}

void add_target(CLI::App* sub, Options& o) {
  sub->add_option("--kind", o.kind, "uniform or gaussian");
  sub->add_option("--a", o.a, "Uniform target lower bound");
  sub->add_option("--b", o.b, "Uniform target upper bound");
  sub->add_option("--trunc", o.trunc, "Gaussian truncation half-width");
  sub->add_option("--grid-nodes", o.grid_nodes, "Proposal grid cells");
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Noisy importance sampling: estimators, variance analytics and experiments", "nis"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  auto* experiment = app.add_subcommand("experiment", "Theoretical and empirical variance ratios");
  add_shared(experiment, o);
  add_target(experiment, o);
  experiment->add_option("--A", o.a_list, "Comma-separated noise levels");
  experiment->add_option("--N", o.n, "Samples per run");
  experiment->add_option("--M", o.m, "Replications");
  experiment->add_option("--quad-nodes", o.quad_nodes, "Quadrature nodes (odd)");
  experiment->add_flag("--paper-closed-form", o.paper_closed_form,
                       "Use q proportional to p exp(sigma^2) in place of sqrt(m^2 + s^2)");

  auto* curve = app.add_subcommand("proposal-curve", "Optimal proposal and noise curves");
  add_shared(curve, o);
  add_target(curve, o);
  curve->add_option("--A", o.a_list, "Comma-separated noise levels");
  curve->add_option("--points", o.points, "Plotting grid points");
  curve->add_flag("--paper-closed-form", o.paper_closed_form, "Closed-form proposal variant");

  auto* variance = app.add_subcommand("variance", "Theoretical variances per noise level");
  add_shared(variance, o);
  add_target(variance, o);
  variance->add_option("--A", o.a_list, "Comma-separated noise levels");
  variance->add_option("--N", o.n, "Samples per run");
  variance->add_option("--quad-nodes", o.quad_nodes, "Quadrature nodes (odd)");
  variance->add_flag("--paper-closed-form", o.paper_closed_form, "Closed-form proposal variant");

  auto* estimate = app.add_subcommand("estimate", "Replicated noisy IS estimates with f(x) = x");
  add_shared(estimate, o);
  add_target(estimate, o);
  estimate->add_option("--noise", o.noise, "bernoulli, folded-gaussian, multiplicative, latent");
  estimate->add_option("--proposal", o.proposal, "target, optimal-z, optimal-std, optimal-self");
  estimate->add_option("--p-max", o.p_max, "Bernoulli bound (default: sup p)");
  estimate->add_option("--sigma", o.sigma, "Folded gaussian noise scale");
  estimate->add_option("--A", o.level, "Multiplicative noise level");
  estimate->add_option("--gamma-sq", o.gamma_sq, "Latent-variable gamma^2 (constant)");
  estimate->add_option("--R", o.r, "Latent-variable auxiliary sample count");
  estimate->add_option("--N", o.n, "Samples per run");
  estimate->add_option("--M", o.m, "Replications");
  estimate->add_option("--quad-nodes", o.quad_nodes, "Quadrature nodes (odd)");
  estimate->add_option("--pilot-N", o.pilot_n, "Pilot samples for optimal-self");

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
    check_format(o);
    if (*experiment) return cmd_experiment(o, out, err);
    if (*curve) return cmd_proposal_curve(o, out, err);
    if (*variance) return cmd_variance(o, out, err);
    return cmd_estimate(o, out, err);
  } catch (const CLI::Success&) {
    err << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: cli: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace nis::cli
