#pragma once

#include <Eigen/Dense>

#include "slowman/numerics/grid.hpp"

namespace slowman {

/// Composite trapezoid over the whole grid. For periodic curves this is
/// spacing * sum of the first count-1 samples.
[[nodiscard]] Eigen::VectorXd trapezoid_integrate(const SampledCurve& curve);

/// Running trapezoid: node i holds the integral from node 0 to node i.
/// For non-periodic curves the last node equals trapezoid_integrate bit-for-bit.
[[nodiscard]] SampledCurve cumulative_trapezoid(const SampledCurve& curve);

/// Euler-Maclaurin end correction for a trapezoid integral over [grid.start, node i]:
/// returns -(h^2/12) (f'(x_i) - f'(x_0)). Adding it lifts the rule to fourth order.
[[nodiscard]] Eigen::VectorXd trapezoid_end_correction(double spacing,
                                                       const Eigen::VectorXd& derivative_at_start,
                                                       const Eigen::VectorXd& derivative_at_end);

}  // namespace slowman
