#pragma once

#include <vector>

#include <Eigen/Dense>

#include "slowman/numerics/grid.hpp"

namespace slowman {

/// Finite-difference weights for the m-th derivative at `at` from values at
/// `nodes` (Fornberg's recursion). Exact for polynomials of degree < nodes.size().
[[nodiscard]] std::vector<double> fd_weights(const std::vector<double>& nodes, double at, int m);

/// First derivative at every grid node from a `points`-wide polynomial stencil,
/// centred in the interior and shifted inward at the ends. `samples` is
/// dim x grid.count(); throws InvalidGrid when the grid has fewer nodes than
/// the stencil.
[[nodiscard]] Eigen::MatrixXd stencil_node_derivatives(const UniformGrid1D& grid, const Eigen::MatrixXd& samples,
                                                       int points = 7);

}  // namespace slowman
