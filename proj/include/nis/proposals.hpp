#pragma once

#include <Eigen/Dense>

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "nis/models.hpp"
#include "nis/rng.hpp"

namespace nis {

inline constexpr int kDefaultGridCells = 4096;

/// Tabulated shape on G + 1 equally spaced nodes.
struct GridTable {
  Eigen::ArrayXd nodes;
  Eigen::ArrayXd unnorm_values;
  /// Normalized density at the nodes, unnorm_values / norm_const.
  Eigen::ArrayXd density;
  /// Cumulative trapezoid integral of `density`; cdf(0) == 0, cdf(G) == 1.
  Eigen::ArrayXd cdf;
  double norm_const = 0.0;
  double step = 0.0;

  Eigen::Index cells() const noexcept { return nodes.size() - 1; }
};

/// Normalized 1D proposal density: the linear interpolant of a tabulated shape.
///
/// The density is piecewise linear between grid nodes, so the trapezoid
/// normalization is exact and sampling by inverse CDF is exact for the density
/// that `density()` reports. Weights computed with `density()` are therefore
/// consistent with the sampler up to rounding.
class Proposal {
 public:
  Proposal(GridTable grid, Interval support, std::string id);

  double density(double x) const;
  double cdf(double x) const;
  /// Inverse CDF for u in (0, 1). Zero-mass cells are never selected; within a
  /// cell the quadratic CDF segment is inverted exactly.
  double inverse_cdf(double u) const;
  double sample(Stream& rng) const { return inverse_cdf(uniform01(rng)); }

  const Interval& support() const noexcept { return support_; }
  const GridTable& grid() const noexcept { return grid_; }
  const std::string& id() const noexcept { return id_; }

 private:
  Eigen::Index cell_of(double x) const;

  GridTable grid_;
  Interval support_;
  std::string id_;
};

using ShapeFunction = std::function<double(double)>;

/// Tabulates `shape` on `cells` + 1 nodes over `support` and normalizes it.
/// Throws on negative or non-finite shape values and on zero total mass.
Proposal build_proposal_from_shape(const ShapeFunction& shape, const Interval& support,
                                   int cells = kDefaultGridCells, std::string id = "shape");

/// q(x) proportional to sqrt(m(x)^2 + s(x)^2); minimizes Var[Z_hat].
Proposal optimal_proposal_for_z(const NoiseModel& noise, const Interval& support,
                                int cells = kDefaultGridCells);

/// q(x) proportional to ||f(x)||_2 sqrt(m^2 + s^2); minimizes the summed
/// component variances of the standard estimator.
Proposal optimal_proposal_for_std(const NoiseModel& noise, const VectorFunction& f,
                                  const Interval& support, int cells = kDefaultGridCells);

/// q(x) proportional to ||f(x) - I||_2 sqrt(m^2 + s^2) with I replaced by a
/// pilot estimate; minimizes the delta-method variance of the self-normalized
/// estimator.
Proposal optimal_proposal_for_self(const NoiseModel& noise, const VectorFunction& f,
                                   const Eigen::VectorXd& i_pilot, const Interval& support,
                                   int cells = kDefaultGridCells);

/// Two-column CSV (x, density) on `points` equally spaced abscissae.
void write_proposal_csv(std::ostream& os, const Proposal& q, int points = 1000);

}  // namespace nis

namespace nis {

/// Abscissae of the strict local maxima of the tabulated density. Endpoints
/// count when they exceed their single neighbour.
std::vector<double> local_maxima(const Proposal& q);

}  // namespace nis
