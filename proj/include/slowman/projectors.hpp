#pragma once

#include <vector>

#include <Eigen/Dense>

#include "slowman/floquet.hpp"
#include "slowman/io.hpp"
#include "slowman/orbit_family.hpp"
#include "slowman/parallel.hpp"

namespace slowman {

/// Dual basis and oblique bundle projectors at every (x, phi) node.
/// Index order everywhere is [x][phi].
struct ProjectorField {
  int n = 0;
  int k = 0;
  UniformGrid1D x_grid;
  int phi_count = 0;
  std::vector<std::vector<Mat>> w;     // [vR | vS | vN]
  std::vector<std::vector<Mat>> winv;
  std::vector<std::vector<Mat>> psi;   // n x (k+1): first k+1 columns of W^-T
  std::vector<std::vector<Mat>> pi_r;
  std::vector<std::vector<Mat>> pi_s;
  std::vector<std::vector<Mat>> pi_n;
  double max_condition = 0.0;

  [[nodiscard]] Mat pi_m(int xi, int p) const {
    return pi_r[static_cast<std::size_t>(xi)][static_cast<std::size_t>(p)] +
           pi_s[static_cast<std::size_t>(xi)][static_cast<std::size_t>(p)];
  }
};

/// Throws IllConditionedBasis (with the node) when cond(W) exceeds max_condition.
[[nodiscard]] ProjectorField build_projector_field(const std::vector<FloquetFrame>& frames,
                                                   double max_condition = 1e8,
                                                   ExecutionPolicy policy = ExecutionPolicy::parallel);

/// Max-norm residuals of the adjoint equation for each psi_i, per x-node.
/// `pure` is |-omega d_phi psi_i - DF0^T psi_i|; `coupled` adds sum_j psi_j C[i,j],
/// the term that the R-S coupling of C introduces when omega' != 0.
struct AdjointReport {
  Mat pure;     // (k+1) x x_count
  Mat coupled;  // (k+1) x x_count
  [[nodiscard]] double max_pure() const { return pure.maxCoeff(); }
  [[nodiscard]] double max_coupled() const { return coupled.maxCoeff(); }
};

[[nodiscard]] AdjointReport check_adjoint_nullspace(const ProblemSpec& spec, const OrbitFamily& family,
                                                    const std::vector<FloquetFrame>& frames,
                                                    const ProjectorField& field);

/// Node-wise algebraic invariants (max over all nodes).
struct ProjectorCheck {
  double inverse = 0.0;        // |W Winv - I|
  double partition = 0.0;      // |Pi_R + Pi_S + Pi_N - I|
  double idempotence = 0.0;    // |Pi_i^2 - Pi_i|
  double annihilation = 0.0;   // |Pi_i Pi_j|, i != j
  double biorthogonality = 0.0;
  double closure = 0.0;        // |Pi(0) - Pi(2 pi)|
  bool ranks_ok = true;
};

[[nodiscard]] ProjectorCheck check_projectors(const ProjectorField& field);

/// |Pi_N(phi_p) - Phi(p, q) Pi_N(phi_q) Phi(p, q)^-1| for one pair of phase nodes.
[[nodiscard]] double semigroup_residual(const ProjectorField& field, const OrbitFamily& family, int xi, int p, int q);

/// One row per node: W, psi and the three projectors, row-major.
[[nodiscard]] Table projector_table(const ProjectorField& field);

}  // namespace slowman
