#pragma once

#include <vector>

#include "slowman/floquet.hpp"
#include "slowman/io.hpp"
#include "slowman/orbit_family.hpp"
#include "slowman/parallel.hpp"
#include "slowman/problem.hpp"
#include "slowman/projectors.hpp"

namespace slowman {

/// Samples of the known right-hand side G_j(x, phi) of the order-j equation.
struct Inhomogeneity {
  int order = 1;
  std::vector<Mat> g;  // [x] n x phi
};

enum class Step3Method {
  stacked,  // periodicity rows plus every orthogonality row, minimum-norm least squares
  kappa,    // 3x3 system: one periodicity row, the kappa consistency row, orthogonality to psi_0
};

struct HomologicalOptions {
  bool omit_g2_hessian = false;  // drop 1/2 D2F0[Gamma1, Gamma1] from G2
  Step3Method step3 = Step3Method::stacked;
  bool end_correction = true;     // Hermite end terms in the variation-of-parameters steps
  XDerivative x_derivative = XDerivative::stencil;
  double resonance_limit = 1e8;   // bound on |(I - M_N)^-1|
  double fredholm_tol = 1e-8;     // relative residual of the Step 3 system
  double solvability_tol = 1e-10; // sigma_min / sigma_max of K below this is singular
};

/// Result of the averaging step at every x-node.
struct AveragedDynamics {
  Mat r;                       // (k+1) x x_count, rows (r_x, r_phi)
  std::vector<Mat> k_matrix;   // [x] (k+1) x (k+1)
  Mat b;                       // (k+1) x x_count
  std::vector<double> k_condition;
};

struct CorrectionOrderJ {
  int order = 1;
  Mat r;
  std::vector<Mat> k_matrix;
  Mat b;
  std::vector<double> k_condition;
  std::vector<Mat> gamma_n;  // [x] n x phi
  std::vector<Mat> gamma;
  std::vector<Mat> gamma_m;
  std::vector<double> resonance_norm;    // |(I - M_N)^-1| per x
  std::vector<double> step3_residual;    // relative residual of the Step 3 system per x
};

/// j = 1: F1(Gamma0). j = 2: F2 + DF1 Gamma1 - DGamma1 r1 + 1/2 D2F0[Gamma1, Gamma1].
/// `prior` holds the corrections of orders 1..j-1.
[[nodiscard]] Inhomogeneity build_inhomogeneity(const ProblemSpec& spec, const OrbitFamily& family,
                                                const std::vector<CorrectionOrderJ>& prior, int j,
                                                const HomologicalOptions& options = {});

/// Solves K(x) r(x) = b(x) with K_i = <DGamma0, psi_i>, b_i = <G, psi_i>.
[[nodiscard]] AveragedDynamics solve_averaged_dynamics(const Inhomogeneity& g, const OrbitFamily& family,
                                                       const std::vector<FloquetFrame>& frames,
                                                       const ProjectorField& field,
                                                       const HomologicalOptions& options = {},
                                                       ExecutionPolicy policy = ExecutionPolicy::parallel);

/// Periodic solution of the projected equation driven by Pi_N G.
/// `resonance` receives |(I - M_N)^-1| per x when non-null.
[[nodiscard]] std::vector<Mat> solve_normal_correction(const ProblemSpec& spec, const Inhomogeneity& g,
                                                       const OrbitFamily& family, const ProjectorField& field,
                                                       const HomologicalOptions& options = {},
                                                       ExecutionPolicy policy = ExecutionPolicy::parallel,
                                                       std::vector<double>* resonance = nullptr);

struct FullCorrection {
  std::vector<Mat> gamma;
  std::vector<Mat> gamma_m;
  std::vector<double> residual;
};

[[nodiscard]] FullCorrection solve_full_correction(const ProblemSpec& spec, const Inhomogeneity& g,
                                                   const AveragedDynamics& averaged,
                                                   const std::vector<Mat>& gamma_n, const OrbitFamily& family,
                                                   const std::vector<FloquetFrame>& frames,
                                                   const ProjectorField& field,
                                                   const HomologicalOptions& options = {},
                                                   ExecutionPolicy policy = ExecutionPolicy::parallel);

/// All three steps for order j.
[[nodiscard]] CorrectionOrderJ solve_order(const ProblemSpec& spec, const OrbitFamily& family,
                                           const std::vector<FloquetFrame>& frames, const ProjectorField& field,
                                           const std::vector<CorrectionOrderJ>& prior, int j,
                                           const HomologicalOptions& options = {},
                                           ExecutionPolicy policy = ExecutionPolicy::parallel);

/// Periodic solution of omega d_phi u - DF0 u = h with u(0) = u0 given:
/// returns J(x, phi) = omega^-1 int_0^phi Phi(phi, s) h(s) ds at every phase node.
[[nodiscard]] Mat variation_of_parameters(const ProblemSpec& spec, const OrbitFamily& family, int xi,
                                          const Mat& h, bool end_correction = true);

/// Tangent map applied to r: vS r_x + vR r_phi / omega at every phase node.
[[nodiscard]] Mat tangent_push(const FloquetFrame& frame, const Vec& r);

/// Mean over the distinct phase nodes of a^T b, i.e. (1/2pi) int a.b dphi.
[[nodiscard]] double phase_inner(const Mat& a, const Mat& b);

/// End-to-end diagnostics for one order (max over all nodes).
struct HomologicalCheck {
  double residual = 0.0;        // |omega d_phi Gamma - DF0 Gamma + DGamma0 r - G|
  double split = 0.0;           // |Gamma - GammaN - GammaM|
  double normal_of_tangent = 0.0;  // |Pi_N GammaM|
  double tangent_of_normal = 0.0;  // |Pi_M GammaN|
  double orthogonality = 0.0;   // |<Gamma, psi_i>|
  double fredholm = 0.0;        // |<G - DGamma0 r, psi_i>|
  double closure = 0.0;         // |Gamma(0) - Gamma(2pi)|, also for GammaN
};

[[nodiscard]] HomologicalCheck check_correction(const ProblemSpec& spec, const OrbitFamily& family,
                                                const std::vector<FloquetFrame>& frames,
                                                const ProjectorField& field, const Inhomogeneity& g,
                                                const CorrectionOrderJ& c);

/// r, K and b per x-node.
[[nodiscard]] Table averaged_table(const OrbitFamily& family, const CorrectionOrderJ& c);
/// G, GammaN, Gamma and GammaM per (x, phi) node.
[[nodiscard]] Table correction_table(const OrbitFamily& family, const Inhomogeneity& g, const CorrectionOrderJ& c);

}  // namespace slowman
