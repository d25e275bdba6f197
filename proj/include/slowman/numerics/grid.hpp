#pragma once

#include <Eigen/Dense>

namespace slowman {

/// Uniformly spaced nodes start = x_0 < x_1 < ... < x_{count-1} = end.
class UniformGrid1D {
 public:
  UniformGrid1D() = default;
  /// Throws InvalidGrid unless count >= 3 and end > start.
  UniformGrid1D(double start, double end, int count);

  [[nodiscard]] double start() const noexcept { return start_; }
  [[nodiscard]] double end() const noexcept { return end_; }
  [[nodiscard]] int count() const noexcept { return count_; }
  [[nodiscard]] double spacing() const noexcept { return (end_ - start_) / (count_ - 1); }
  /// Node i; the last node is `end` exactly.
  [[nodiscard]] double value(int i) const noexcept {
    return i == count_ - 1 ? end_ : start_ + i * spacing();
  }
  [[nodiscard]] Eigen::VectorXd values() const;
  [[nodiscard]] bool contains(double x) const noexcept { return x >= start_ && x <= end_; }

  friend bool operator==(const UniformGrid1D&, const UniformGrid1D&) = default;

 private:
  double start_ = 0.0;
  double end_ = 1.0;
  int count_ = 3;
};

/// The closed phase grid on [0, 2*pi] with `count` nodes (node count-1 repeats node 0).
[[nodiscard]] UniformGrid1D phase_grid(int count);

/// Vector-valued samples on a grid: column i holds the value at node i.
struct SampledCurve {
  UniformGrid1D grid;
  Eigen::MatrixXd samples;  // dim x count
  bool periodic = false;

  SampledCurve() = default;
  SampledCurve(UniformGrid1D g, Eigen::MatrixXd s, bool is_periodic = false);

  [[nodiscard]] int dim() const noexcept { return static_cast<int>(samples.rows()); }
  [[nodiscard]] int count() const noexcept { return grid.count(); }
  /// max-norm distance between first and last sample.
  [[nodiscard]] double closure_error() const;
};

}  // namespace slowman
