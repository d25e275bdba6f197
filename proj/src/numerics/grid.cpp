#include "slowman/numerics/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "slowman/errors.hpp"

namespace slowman {

UniformGrid1D::UniformGrid1D(double start, double end, int count)
    : start_(start), end_(end), count_(count) {
  if (count < 3) {
    throw InvalidGrid("uniform grid needs at least 3 nodes, got " + std::to_string(count));
  }
  if (!(end > start) || !std::isfinite(start) || !std::isfinite(end)) {
    throw InvalidGrid("uniform grid needs finite start < end");
  }
}

Eigen::VectorXd UniformGrid1D::values() const {
  Eigen::VectorXd v(count_);
  for (int i = 0; i < count_; ++i) v[i] = value(i);
  return v;
}

UniformGrid1D phase_grid(int count) { return {0.0, 2.0 * std::numbers::pi, count}; }

SampledCurve::SampledCurve(UniformGrid1D g, Eigen::MatrixXd s, bool is_periodic)
    : grid(g), samples(std::move(s)), periodic(is_periodic) {
  if (samples.cols() != grid.count()) {
    throw InvalidGrid("sample count " + std::to_string(samples.cols()) + " does not match grid count " +
                      std::to_string(grid.count()));
  }
}

double SampledCurve::closure_error() const {
  return (samples.col(0) - samples.col(samples.cols() - 1)).lpNorm<Eigen::Infinity>();
}

}  // namespace slowman
