#include "slowman/numerics/spectral.hpp"

#include <cmath>
#include <numbers>

#include "slowman/errors.hpp"

namespace slowman {

SpectralDifferentiator::SpectralDifferentiator(int closed_count) {
  if (closed_count < 4) throw InvalidGrid("spectral differentiation needs at least 4 closed nodes");
  const int n = closed_count - 1;
  const double h = 2.0 * std::numbers::pi / n;
  matrix_ = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int d = i - j;
      const double sign = (d % 2 == 0) ? 1.0 : -1.0;
      const double half = 0.5 * d * h;
      matrix_(i, j) = n % 2 == 0 ? 0.5 * sign / std::tan(half) : 0.5 * sign / std::sin(half);
    }
  }
}

Eigen::MatrixXd SpectralDifferentiator::apply(const Eigen::MatrixXd& samples) const {
  const Eigen::Index n = matrix_.rows();
  if (samples.cols() != n + 1) throw InvalidGrid("spectral differentiation: sample count mismatch");
  Eigen::MatrixXd out(samples.rows(), n + 1);
  out.leftCols(n) = samples.leftCols(n) * matrix_.transpose();
  out.col(n) = out.col(0);
  return out;
}

}  // namespace slowman
