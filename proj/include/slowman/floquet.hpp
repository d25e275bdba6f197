#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "slowman/numerics/grid.hpp"
#include "slowman/orbit_family.hpp"
#include "slowman/parallel.hpp"
#include "slowman/problem.hpp"

namespace slowman {

struct ExponentClassification {
  std::vector<std::complex<double>> mu;   // eigenvalues of B, trivial ones first
  std::vector<std::complex<double>> rho;  // exp(mu T), same order
  std::vector<int> trivial;               // indices into mu
  std::vector<int> stable;                // nontrivial indices with Re mu < 0
  std::vector<int> unstable;
  double lambda = 0.0;                    // min |Re mu| over nontrivial exponents
};

/// Marks the k+1 exponents whose multipliers lie within cluster_tol of 1 as
/// trivial. Throws HyperbolicityViolation when the cluster has any other size.
[[nodiscard]] ExponentClassification classify_exponents(const Mat& monodromy, const Mat& b, double period, int k,
                                                        double cluster_tol = 1e-6);

/// Per-orbit Floquet data and the bundle bases along the orbit.
/// Columns of vR, vS[j], vN[j] are indexed by phase node.
struct FloquetFrame {
  double x = 0.0;
  double period = 0.0;
  double omega = 0.0;
  double omega_prime = 0.0;
  Mat monodromy;
  Mat b;
  ExponentClassification exponents;
  Mat vR;               // n x phi
  std::vector<Mat> vS;  // k of n x phi
  std::vector<Mat> vN;  // n-k-1 of n x phi
  Mat c;                // basis-adapted constant matrix, order R | S | N
  bool reduced_accuracy = false;  // x-derivatives used a one-sided stencil

  [[nodiscard]] int n() const noexcept { return static_cast<int>(vR.rows()); }
  [[nodiscard]] int phi_count() const noexcept { return static_cast<int>(vR.cols()); }
  /// W = [vR | vS | vN] at phase node p.
  [[nodiscard]] Mat basis(int p) const;
};

enum class XDerivative {
  stencil,       // 7-point local polynomial, sixth order
  cubic_spline,  // not-a-knot spline, fourth order inside, third at the ends
};

struct FrameOptions {
  XDerivative x_derivative = XDerivative::stencil;
  // take omega' and vS(0) from the periodicity constraint of the tangent basis,
  // using the x-derivatives only to fix the vR component of vS(0)
  bool enforce_closure = true;
  double cluster_tol = 1e-6;
  double decomposition_tol = 1e-6;  // |Phi - W e^{Ct} W0^-1| at sampled nodes
  double closure_tol = 1e-6;        // periodicity of the bases
  int decomposition_samples = 8;
};

/// Frames for every x-node. The x-derivatives of gamma0(x,0) and omega are
/// taken over the whole family; normal eigenvectors are unit length and
/// sign-aligned from node to node.
[[nodiscard]] std::vector<FloquetFrame> compute_frames(const ProblemSpec& spec, const OrbitFamily& family,
                                                       const FrameOptions& options = {},
                                                       ExecutionPolicy policy = ExecutionPolicy::parallel);

/// d/dx at every node of `grid` for dim x count samples.
[[nodiscard]] Mat x_derivatives(const UniformGrid1D& grid, const Mat& samples, XDerivative method);

/// |Phi(phi_p) - W(phi_p) e^{C t_p} W(0)^-1|_max over the phase node p.
[[nodiscard]] double decomposition_residual(const FloquetFrame& frame, const OrbitFamily& family, int xi, int p);

/// Diagnostic invariants of a frame set.
struct FrameCheck {
  double max_exp_mismatch = 0.0;      // |exp(T B) - M| relative
  double max_vr_transport = 0.0;      // |Phi vR(0) - vR(phi)|
  double max_tangent_leak = 0.0;      // normal component of Phi [vR vS](0), relative to W
  double max_closure = 0.0;           // |v(0) - v(2 pi)| over all bases
  double max_decomposition = 0.0;
  bool lambda_continuous = true;
};

[[nodiscard]] FrameCheck check_frames(const std::vector<FloquetFrame>& frames, const OrbitFamily& family);

}  // namespace slowman
