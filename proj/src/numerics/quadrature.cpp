#include "slowman/numerics/quadrature.hpp"

#include "slowman/errors.hpp"

namespace slowman {

namespace {

void require_nodes(const SampledCurve& curve) {
  if (curve.count() < 3 || curve.samples.cols() != curve.count()) {
    throw InvalidGrid("trapezoid rule needs a curve with at least 3 nodes");
  }
}

}  // namespace

Eigen::VectorXd trapezoid_integrate(const SampledCurve& curve) {
  require_nodes(curve);
  const double h = curve.grid.spacing();
  const auto& f = curve.samples;
  const Eigen::Index last = f.cols() - 1;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(f.rows());
  if (curve.periodic) {
    for (Eigen::Index i = 0; i < last; ++i) acc += f.col(i);
    return h * acc;
  }
  // same order of operations as cumulative_trapezoid
  for (Eigen::Index i = 0; i < last; ++i) acc += 0.5 * h * (f.col(i) + f.col(i + 1));
  return acc;
}

SampledCurve cumulative_trapezoid(const SampledCurve& curve) {
  require_nodes(curve);
  const double h = curve.grid.spacing();
  const auto& f = curve.samples;
  Eigen::MatrixXd out(f.rows(), f.cols());
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(f.rows());
  out.col(0) = acc;
  for (Eigen::Index i = 0; i + 1 < f.cols(); ++i) {
    acc += 0.5 * h * (f.col(i) + f.col(i + 1));
    out.col(i + 1) = acc;
  }
  return {curve.grid, std::move(out), false};
}

Eigen::VectorXd trapezoid_end_correction(double spacing, const Eigen::VectorXd& derivative_at_start,
                                         const Eigen::VectorXd& derivative_at_end) {
  return -(spacing * spacing / 12.0) * (derivative_at_end - derivative_at_start);
}

}  // namespace slowman
