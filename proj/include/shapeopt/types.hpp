#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

namespace shapeopt {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Barycentric coordinates (lambda_1, lambda_2, lambda_3) on a triangle.
using Bary = std::array<double, 3>;

/// Per-node 2D vector field. Used both for mesh displacements and for the
/// autonomous perturbation velocity V in T_t = Id + tV.
using DisplacementField = std::vector<Vec2>;
using PerturbationField = DisplacementField;

}  // namespace shapeopt
