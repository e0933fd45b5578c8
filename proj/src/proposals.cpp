#include "nis/proposals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nis/csv.hpp"
#include "nis/error.hpp"

namespace nis {
namespace {

std::string at(double x) {
  std::ostringstream os;
  os.precision(17);
  os << " at x = " << x;
  return os.str();
}

}  // namespace

Proposal::Proposal(GridTable grid, Interval support, std::string id)
    : grid_(std::move(grid)), support_(support), id_(std::move(id)) {}

Eigen::Index Proposal::cell_of(double x) const {
  const auto k = static_cast<Eigen::Index>(std::floor((x - support_.lo) / grid_.step));
  return std::clamp<Eigen::Index>(k, 0, grid_.cells() - 1);
}

double Proposal::density(double x) const {
  if (!support_.contains(x)) return 0.0;
  const Eigen::Index k = cell_of(x);
  const double t = std::clamp((x - grid_.nodes[k]) / grid_.step, 0.0, 1.0);
  return grid_.density[k] + t * (grid_.density[k + 1] - grid_.density[k]);
}

double Proposal::cdf(double x) const {
  if (x <= support_.lo) return 0.0;
  if (x >= support_.hi) return 1.0;
  const Eigen::Index k = cell_of(x);
  const double t = std::clamp((x - grid_.nodes[k]) / grid_.step, 0.0, 1.0);
  const double d0 = grid_.density[k];
  const double d1 = grid_.density[k + 1];
  const double mass = grid_.cdf[k + 1] - grid_.cdf[k];
  const double sum = d0 + d1;
  const double fraction = sum > 0.0 ? (2.0 * d0 * t + (d1 - d0) * t * t) / sum : 0.0;
  return grid_.cdf[k] + mass * fraction;
}

double Proposal::inverse_cdf(double u) const {
  const auto& c = grid_.cdf;
  const auto* first = c.data();
  const auto* last = c.data() + c.size();
  // Cell k with cdf[k] <= u < cdf[k+1]; the left-most such cell on ties.
  const auto* it = std::upper_bound(first, last, u);
  const Eigen::Index k = std::clamp<Eigen::Index>((it - first) - 1, 0, grid_.cells() - 1);
  const double mass = c[k + 1] - c[k];
  const double r = mass > 0.0 ? std::clamp((u - c[k]) / mass, 0.0, 1.0) : 0.0;
  const double d0 = grid_.density[k];
  const double d1 = grid_.density[k + 1];
  const double denom = d0 + std::sqrt((1.0 - r) * d0 * d0 + r * d1 * d1);
  const double t = denom > 0.0 ? std::clamp(r * (d0 + d1) / denom, 0.0, 1.0) : 0.0;
  return std::min(grid_.nodes[k] + t * grid_.step, support_.hi);
}

Proposal build_proposal_from_shape(const ShapeFunction& shape, const Interval& support, int cells,
                                   std::string id) {
  if (cells < 1) throw Error("proposals", "grid needs at least one cell");
  if (!(support.lo < support.hi) || !std::isfinite(support.lo) || !std::isfinite(support.hi))
    throw Error("proposals", "support must be a finite interval with lo < hi");

  GridTable g;
  g.step = support.width() / cells;
  g.nodes.resize(cells + 1);
  g.unnorm_values.resize(cells + 1);
  for (int i = 0; i <= cells; ++i) {
    const double x = i == cells ? support.hi : support.lo + i * g.step;
    const double v = shape(x);
    if (!std::isfinite(v)) throw Error("proposals", "shape value is not finite" + at(x));
    if (v < 0.0) throw Error("proposals", "shape value is negative" + at(x));
    g.nodes[i] = x;
    g.unnorm_values[i] = v;
  }
  const Eigen::Index n = g.unnorm_values.size();
  g.norm_const = g.step * (g.unnorm_values.sum() - 0.5 * (g.unnorm_values[0] + g.unnorm_values[n - 1]));
  if (!(g.norm_const > 0.0) || !std::isfinite(g.norm_const))
    throw Error("proposals", "shape '" + id + "' has zero or non-finite total mass");

  g.density = g.unnorm_values / g.norm_const;
  g.cdf.resize(n);
  g.cdf[0] = 0.0;
  for (Eigen::Index i = 1; i < n; ++i)
    g.cdf[i] = g.cdf[i - 1] + 0.5 * g.step * (g.density[i - 1] + g.density[i]);
  g.cdf /= g.cdf[n - 1];
  g.cdf[n - 1] = 1.0;
  return Proposal(std::move(g), support, std::move(id));
}

Proposal optimal_proposal_for_z(const NoiseModel& noise, const Interval& support, int cells) {
  return build_proposal_from_shape([&noise](double x) { return noise.rms(x); }, support, cells,
                                   "optimal-z");
}

Proposal optimal_proposal_for_std(const NoiseModel& noise, const VectorFunction& f,
                                  const Interval& support, int cells) {
  return build_proposal_from_shape([&](double x) { return f(x).norm() * noise.rms(x); }, support,
                                   cells, "optimal-std");
}

Proposal optimal_proposal_for_self(const NoiseModel& noise, const VectorFunction& f,
                                   const Eigen::VectorXd& i_pilot, const Interval& support,
                                   int cells) {
  if (i_pilot.size() != f.dim)
    throw Error("proposals", "pilot estimate has length " + std::to_string(i_pilot.size()) +
                                 ", expected " + std::to_string(f.dim));
  return build_proposal_from_shape(
      [&](double x) { return (f(x) - i_pilot).norm() * noise.rms(x); }, support, cells,
      "optimal-self");
}

void write_proposal_csv(std::ostream& os, const Proposal& q, int points) {
  if (points < 2) throw Error("proposals", "curve export needs at least 2 points");
  const Interval& s = q.support();
  csv::write_row(os, {"x", "density"});
  for (int i = 0; i < points; ++i) {
    const double x = i == points - 1 ? s.hi : s.lo + s.width() * i / (points - 1);
    csv::write_row(os, {csv::real(x), csv::real(q.density(x))});
  }
}

}  // namespace nis

namespace nis {

std::vector<double> local_maxima(const Proposal& q) {
  const auto& d = q.grid().density;
  const auto& x = q.grid().nodes;
  const Eigen::Index last = d.size() - 1;
  std::vector<double> out;
  for (Eigen::Index i = 0; i <= last; ++i) {
    const bool above_left = i == 0 || d[i] > d[i - 1];
    const bool above_right = i == last || d[i] > d[i + 1];
    if (above_left && above_right) out.push_back(x[i]);
  }
  return out;
}

}  // namespace nis
