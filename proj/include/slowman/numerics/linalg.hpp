#pragma once

#include <Eigen/Dense>

namespace slowman {

/// Real principal logarithm. Throws BranchFailure when an eigenvalue lies on
/// the closed negative real axis (or at zero).
[[nodiscard]] Eigen::MatrixXd principal_matrix_log(const Eigen::MatrixXd& m);

[[nodiscard]] Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& a);

struct LeastSquaresResult {
  Eigen::VectorXd solution;
  double residual_norm = 0.0;
  int rank = 0;
};

inline constexpr double kRankTolerance = 1e-10;

/// Minimum-norm least-squares solution; singular values below
/// rank_tol * sigma_max count as zero.
[[nodiscard]] LeastSquaresResult solve_least_squares(const Eigen::MatrixXd& a,
                                                     const Eigen::VectorXd& b,
                                                     double rank_tol = kRankTolerance);

/// 2-norm condition number (sigma_max / sigma_min); infinity when singular.
[[nodiscard]] double condition_number(const Eigen::MatrixXd& a);

/// Relative Frobenius distance |a - b| / max(|b|, tiny).
[[nodiscard]] double relative_frobenius(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace slowman
