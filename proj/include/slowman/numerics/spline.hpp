#pragma once

#include <Eigen/Dense>

#include "slowman/numerics/grid.hpp"

namespace slowman {

enum class SplineEnd {
  not_a_knot,  // reproduces cubics exactly
  periodic,    // samples[0] == samples[last], C2 across the seam
};

/// C2 cubic spline through every column of a sample matrix on a uniform grid.
/// All components share one factorisation of the moment system.
class CubicSpline {
 public:
  CubicSpline() = default;
  /// `samples` is dim x grid.count().
  CubicSpline(const UniformGrid1D& grid, const Eigen::MatrixXd& samples, SplineEnd end);

  [[nodiscard]] const UniformGrid1D& grid() const noexcept { return grid_; }
  [[nodiscard]] int dim() const noexcept { return static_cast<int>(values_.rows()); }

  /// Throws DomainError outside [start, end] (periodic splines wrap instead).
  [[nodiscard]] Eigen::VectorXd value(double x) const;
  [[nodiscard]] Eigen::VectorXd derivative(double x) const;
  [[nodiscard]] Eigen::VectorXd second_derivative(double x) const;
  /// Derivative at every node, dim x count.
  [[nodiscard]] Eigen::MatrixXd node_derivatives() const;

 private:
  [[nodiscard]] int locate(double& x) const;

  UniformGrid1D grid_;
  Eigen::MatrixXd values_;   // dim x count
  Eigen::MatrixXd moments_;  // dim x count, second derivatives at nodes
  SplineEnd end_ = SplineEnd::not_a_knot;
};

/// Derivative of the C2 interpolant of `curve` at `at` (periodic end conditions
/// when the curve is flagged periodic, not-a-knot otherwise).
[[nodiscard]] Eigen::VectorXd interpolate_derivative(const SampledCurve& curve, double at);

}  // namespace slowman
