#pragma once

#include <Eigen/Dense>

namespace slowman::oracle {

/// Closed forms for the bent ellipsoid example. Everything here is evaluated
/// from formulas, never from the numerical pipeline, so it can judge it.
///
/// The normal Floquet exponent of the layer flow is a^2 mu(x) with
/// mu = -(1 + sin x); the printed corrections use mu as that exponent, so the
/// functions marked "a = 1" throw UnsupportedConfiguration for other a.
struct EllipsoidParams {
  double a = 1.0;
  double rho = 5.0 / 3.0;
};

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

[[nodiscard]] double mu(double x);

// All functions throw SingularParametrisation when sin x or cos x vanishes
// to within 1e-12 where the formula divides by it; Gamma0 and the tangent
// vectors only exclude the poles.
[[nodiscard]] Vec3 gamma0(const EllipsoidParams& p, double x, double phi);
[[nodiscard]] Vec3 v_r(const EllipsoidParams& p, double x, double phi);
[[nodiscard]] Vec3 v_s(const EllipsoidParams& p, double x, double phi);
[[nodiscard]] Vec3 v_n(const EllipsoidParams& p, double x, double phi);
/// a = 1.
[[nodiscard]] Mat3 floquet_b(const EllipsoidParams& p, double x);

struct Projectors {
  Mat3 r;
  Mat3 s;
  Mat3 n;
};
[[nodiscard]] Projectors projectors(const EllipsoidParams& p, double x, double phi);
/// Columns psi_1, psi_2, psi_3 of (P^{-1})^T.
[[nodiscard]] Mat3 psi(const EllipsoidParams& p, double x, double phi);

/// (r_x, r_phi) of the first-order averaged field.
[[nodiscard]] Eigen::Vector2d r1(const EllipsoidParams& p, double x);
/// Normal correction Pi_N Gamma1; a = 1. The published coefficient form
/// (h0..h4) is used with its prefactor multiplied by -cos(x)/2.
[[nodiscard]] Vec3 gamma1_normal(const EllipsoidParams& p, double x, double phi);
/// The coefficient form exactly as published (inconsistent with gamma1); a = 1.
[[nodiscard]] Vec3 gamma1_normal_as_printed(const EllipsoidParams& p, double x, double phi);
/// a = 1.
[[nodiscard]] Vec3 gamma1(const EllipsoidParams& p, double x, double phi);
/// The printed initial condition Gamma1(x, 0); a = 1.
[[nodiscard]] Vec3 gamma1_initial(const EllipsoidParams& p, double x);
/// a = 1.
[[nodiscard]] Vec3 gamma1_tangent(const EllipsoidParams& p, double x, double phi);

/// Homological residual omega d_phi Gamma1 - DF0(Gamma0) Gamma1 + DGamma0 r1 - F1(Gamma0)
/// of the closed forms, with d_phi by complex step (exact to rounding).
[[nodiscard]] Vec3 homological_residual(const EllipsoidParams& p, double x, double phi);
/// Same for the normal part: omega d_phi Gamma1N - DF0 Gamma1N - Pi_N F1.
[[nodiscard]] Vec3 normal_residual(const EllipsoidParams& p, double x, double phi);

/// Max homological and normal residual over `samples` random nodes with
/// x in [0.1 pi, 0.9 pi] away from pi/2; the transcription self-test.
[[nodiscard]] double self_test(const EllipsoidParams& p, int samples = 200, unsigned seed = 1);

}  // namespace slowman::oracle
