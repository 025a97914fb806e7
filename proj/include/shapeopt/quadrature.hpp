#pragma once

#include <array>

#include "shapeopt/types.hpp"

namespace shapeopt {

struct QuadPoint {
  Bary bary;
  double weight;  // fraction of the triangle area; weights sum to 1
};

/// Six-point symmetric rule, exact for polynomials of total degree <= 4.
inline constexpr std::array<QuadPoint, 6> kTriangleRule4 = {{
    {{0.44594849091596489, 0.44594849091596489, 0.10810301816807023}, 0.22338158967801147},
    {{0.44594849091596489, 0.10810301816807023, 0.44594849091596489}, 0.22338158967801147},
    {{0.10810301816807023, 0.44594849091596489, 0.44594849091596489}, 0.22338158967801147},
    {{0.091576213509770743, 0.091576213509770743, 0.81684757298045851}, 0.10995174365532187},
    {{0.091576213509770743, 0.81684757298045851, 0.091576213509770743}, 0.10995174365532187},
    {{0.81684757298045851, 0.091576213509770743, 0.091576213509770743}, 0.10995174365532187},
}};

/// Three-point Gauss-Legendre rule on [0, 1] for edge integrals.
struct EdgePoint {
  double s;
  double weight;
};
inline constexpr std::array<EdgePoint, 3> kEdgeRule = {{
    {0.1127016653792583, 5.0 / 18.0},
    {0.5, 8.0 / 18.0},
    {0.8872983346207417, 5.0 / 18.0},
}};

}  // namespace shapeopt
