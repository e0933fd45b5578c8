#include "nis/quadrature.hpp"

namespace nis {

void validate(const QuadratureSpec& spec) {
  if (!(spec.interval.lo < spec.interval.hi))
    throw Error("quadrature", "interval requires lo < hi");
  if (spec.nodes < 2) throw Error("quadrature", "at least 2 nodes are required");
  if (spec.rule == QuadratureRule::Simpson && (spec.nodes < 3 || spec.nodes % 2 == 0))
    throw Error("quadrature",
                "Simpson rule needs an odd node count >= 3, got " + std::to_string(spec.nodes));
}

}  // namespace nis
