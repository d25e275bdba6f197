#pragma once

#include <Eigen/Dense>

namespace slowman {

/// Trigonometric differentiation of 2*pi-periodic samples on a closed uniform
/// grid with `closed_count` nodes (the last node duplicates the first).
class SpectralDifferentiator {
 public:
  explicit SpectralDifferentiator(int closed_count);

  [[nodiscard]] int closed_count() const noexcept { return static_cast<int>(matrix_.rows()) + 1; }
  /// `samples` is dim x closed_count; returns d/dphi with the same layout
  /// (the seam column is copied from column 0).
  [[nodiscard]] Eigen::MatrixXd apply(const Eigen::MatrixXd& samples) const;

 private:
  Eigen::MatrixXd matrix_;  // N x N on the distinct nodes
};

}  // namespace slowman
