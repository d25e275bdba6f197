#include "slowman/numerics/spline.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "slowman/errors.hpp"

namespace slowman {

namespace {

// Second derivatives of the interpolant at the nodes, one row per component.
Eigen::MatrixXd solve_moments(const UniformGrid1D& grid, const Eigen::MatrixXd& y, SplineEnd end) {
  const int count = grid.count();
  const int last = count - 1;
  const double h = grid.spacing();
  const double scale = 6.0 / (h * h);
  const Eigen::Index dim = y.rows();

  if (end == SplineEnd::not_a_knot && count == 3) {
    // a single parabola through three points
    Eigen::MatrixXd m(dim, count);
    const Eigen::VectorXd d2 = (y.col(0) - 2.0 * y.col(1) + y.col(2)) / (h * h);
    for (int i = 0; i < count; ++i) m.col(i) = d2;
    return m;
  }

  const int unknowns = end == SplineEnd::periodic ? last : count;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(unknowns) * 3);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(unknowns, dim);

  if (end == SplineEnd::periodic) {
    for (int i = 0; i < last; ++i) {
      const int prev = (i + last - 1) % last;
      const int next = (i + 1) % last;
      entries.emplace_back(i, prev, 1.0);
      entries.emplace_back(i, i, 4.0);
      entries.emplace_back(i, next, 1.0);
      rhs.row(i) = scale * (y.col(prev) - 2.0 * y.col(i) + y.col(next)).transpose();
    }
  } else {
    entries.emplace_back(0, 0, 1.0);
    entries.emplace_back(0, 1, -2.0);
    entries.emplace_back(0, 2, 1.0);
    for (int i = 1; i < last; ++i) {
      entries.emplace_back(i, i - 1, 1.0);
      entries.emplace_back(i, i, 4.0);
      entries.emplace_back(i, i + 1, 1.0);
      rhs.row(i) = scale * (y.col(i - 1) - 2.0 * y.col(i) + y.col(i + 1)).transpose();
    }
    entries.emplace_back(last, last - 2, 1.0);
    entries.emplace_back(last, last - 1, -2.0);
    entries.emplace_back(last, last, 1.0);
  }

  // periodic systems with two unknowns see duplicate (i, j) entries; setFromTriplets sums them
  Eigen::SparseMatrix<double> a(unknowns, unknowns);
  a.setFromTriplets(entries.begin(), entries.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw NumericalError("spline moment system is singular");
  const Eigen::MatrixXd sol = lu.solve(rhs);

  Eigen::MatrixXd m(dim, count);
  m.leftCols(unknowns) = sol.transpose();
  if (end == SplineEnd::periodic) m.col(last) = m.col(0);
  return m;
}

}  // namespace

CubicSpline::CubicSpline(const UniformGrid1D& grid, const Eigen::MatrixXd& samples, SplineEnd end)
    : grid_(grid), values_(samples), end_(end) {
  if (samples.cols() != grid.count()) {
    throw InvalidGrid("spline sample count does not match grid");
  }
  if (end == SplineEnd::periodic) {
    // the seam sample is redundant; use the first one so the interpolant closes exactly
    values_.col(grid.count() - 1) = values_.col(0);
  }
  moments_ = solve_moments(grid_, values_, end_);
}

int CubicSpline::locate(double& x) const {
  const double a = grid_.start();
  const double b = grid_.end();
  const double slop = 1e-12 * (b - a);
  if (end_ == SplineEnd::periodic) {
    const double period = b - a;
    x = a + std::fmod(x - a, period);
    if (x < a) x += period;
  } else if (x < a - slop || x > b + slop || !std::isfinite(x)) {
    throw DomainError("spline evaluated at " + std::to_string(x) + " outside [" + std::to_string(a) +
                      ", " + std::to_string(b) + "]");
  }
  const int intervals = grid_.count() - 1;
  int i = static_cast<int>(std::floor((x - a) / grid_.spacing()));
  if (i < 0) i = 0;
  if (i > intervals - 1) i = intervals - 1;
  return i;
}

Eigen::VectorXd CubicSpline::value(double x) const {
  const int i = locate(x);
  const double h = grid_.spacing();
  const double l = grid_.value(i + 1) - x;
  const double r = x - grid_.value(i);
  return moments_.col(i) * (l * l * l / (6.0 * h)) + moments_.col(i + 1) * (r * r * r / (6.0 * h)) +
         (values_.col(i) / h - moments_.col(i) * (h / 6.0)) * l +
         (values_.col(i + 1) / h - moments_.col(i + 1) * (h / 6.0)) * r;
}

Eigen::VectorXd CubicSpline::derivative(double x) const {
  const int i = locate(x);
  const double h = grid_.spacing();
  const double l = grid_.value(i + 1) - x;
  const double r = x - grid_.value(i);
  return -moments_.col(i) * (l * l / (2.0 * h)) + moments_.col(i + 1) * (r * r / (2.0 * h)) +
         (values_.col(i + 1) - values_.col(i)) / h - (moments_.col(i + 1) - moments_.col(i)) * (h / 6.0);
}

Eigen::VectorXd CubicSpline::second_derivative(double x) const {
  const int i = locate(x);
  const double h = grid_.spacing();
  const double l = grid_.value(i + 1) - x;
  const double r = x - grid_.value(i);
  return (moments_.col(i) * l + moments_.col(i + 1) * r) / h;
}

Eigen::MatrixXd CubicSpline::node_derivatives() const {
  Eigen::MatrixXd d(values_.rows(), grid_.count());
  for (int i = 0; i < grid_.count(); ++i) d.col(i) = derivative(grid_.value(i));
  return d;
}

Eigen::VectorXd interpolate_derivative(const SampledCurve& curve, double at) {
  if (!curve.grid.contains(at)) {
    throw DomainError("interpolate_derivative: " + std::to_string(at) + " outside the grid");
  }
  const CubicSpline spline(curve.grid, curve.samples,
                           curve.periodic ? SplineEnd::periodic : SplineEnd::not_a_knot);
  return spline.derivative(at);
}

}  // namespace slowman
