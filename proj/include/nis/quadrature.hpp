#pragma once

#include <cmath>
#include <sstream>
#include <string>

#include "nis/error.hpp"
#include "nis/models.hpp"

namespace nis {

enum class QuadratureRule { Trapezoid, Simpson };

struct QuadratureSpec {
  QuadratureRule rule = QuadratureRule::Simpson;
  int nodes = (1 << 14) + 1;
  Interval interval;
};

inline constexpr int kDefaultQuadratureNodes = (1 << 14) + 1;

/// Spec over `interval` with the default rule and node count.
inline QuadratureSpec quadrature_spec(const Interval& interval,
                                      int nodes = kDefaultQuadratureNodes) {
  return {QuadratureRule::Simpson, nodes, interval};
}

void validate(const QuadratureSpec& spec);

/// Composite trapezoid/Simpson integral of g over [lo, hi] on `nodes` equally
/// spaced abscissae. Every node value must be finite.
template <typename Scalar, typename Fn>
Scalar integrate(Fn&& g, Scalar lo, Scalar hi, int nodes, QuadratureRule rule) {
  const int intervals = nodes - 1;
  const Scalar h = (hi - lo) / Scalar(intervals);
  Scalar sum(0);
  for (int i = 0; i <= intervals; ++i) {
    const Scalar x = i == intervals ? hi : lo + Scalar(i) * h;
    const Scalar gx = g(x);
    if (!std::isfinite(gx)) {
      std::ostringstream os;
      os.precision(17);
      os << "integrand is not finite at node " << i << " (x = " << x << ")";
      throw Error("quadrature", os.str());
    }
    Scalar weight(1);
    if (i != 0 && i != intervals) {
      weight = rule == QuadratureRule::Simpson ? Scalar(i % 2 == 1 ? 4 : 2) : Scalar(2);
    }
    sum += weight * gx;
  }
  return rule == QuadratureRule::Simpson ? sum * h / Scalar(3) : sum * h / Scalar(2);
}

template <typename Fn>
double quadrature(Fn&& g, const QuadratureSpec& spec) {
  validate(spec);
  return integrate<double>(std::forward<Fn>(g), spec.interval.lo, spec.interval.hi, spec.nodes,
                           spec.rule);
}

}  // namespace nis
