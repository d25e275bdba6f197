#include "slowman/numerics/stencil.hpp"

#include <algorithm>

#include "slowman/errors.hpp"

namespace slowman {

std::vector<double> fd_weights(const std::vector<double>& nodes, double at, int m) {
  const int n = static_cast<int>(nodes.size()) - 1;
  // c[j][k]: weight of node j for the k-th derivative
  std::vector<std::vector<double>> c(static_cast<std::size_t>(n + 1), std::vector<double>(static_cast<std::size_t>(m + 1), 0.0));
  c[0][0] = 1.0;
  double c1 = 1.0;
  double c4 = nodes[0] - at;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[static_cast<std::size_t>(i)] - at;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[static_cast<std::size_t>(i)] - nodes[static_cast<std::size_t>(j)];
      c2 *= c3;
      auto& ci = c[static_cast<std::size_t>(i)];
      auto& cj = c[static_cast<std::size_t>(j)];
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          ci[static_cast<std::size_t>(k)] =
              c1 * (k * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k - 1)] -
                    c5 * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k)]) / c2;
        ci[0] = -c1 * c5 * c[static_cast<std::size_t>(i - 1)][0] / c2;
      }
      for (int k = mn; k >= 1; --k)
        cj[static_cast<std::size_t>(k)] = (c4 * cj[static_cast<std::size_t>(k)] - k * cj[static_cast<std::size_t>(k - 1)]) / c3;
      cj[0] = c4 * cj[0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(static_cast<std::size_t>(n + 1));
  for (int j = 0; j <= n; ++j) w[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)];
  return w;
}

Eigen::MatrixXd stencil_node_derivatives(const UniformGrid1D& grid, const Eigen::MatrixXd& samples, int points) {
  const int count = grid.count();
  if (points < 2 || count < points) throw InvalidGrid("grid has fewer nodes than the differentiation stencil");
  if (samples.cols() != count) throw InvalidGrid("sample count does not match the grid");
  // weights in units of the spacing, one set per stencil offset
  std::vector<std::vector<double>> weights(static_cast<std::size_t>(points));
  std::vector<double> unit(static_cast<std::size_t>(points));
  for (int j = 0; j < points; ++j) unit[static_cast<std::size_t>(j)] = j;
  for (int s = 0; s < points; ++s) weights[static_cast<std::size_t>(s)] = fd_weights(unit, s, 1);

  const double h = grid.spacing();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(samples.rows(), count);
  const int half = points / 2;
  for (int i = 0; i < count; ++i) {
    const int first = std::clamp(i - half, 0, count - points);
    const auto& w = weights[static_cast<std::size_t>(i - first)];
    for (int j = 0; j < points; ++j) out.col(i) += w[static_cast<std::size_t>(j)] * samples.col(first + j);
    out.col(i) /= h;
  }
  return out;
}

}  // namespace slowman
