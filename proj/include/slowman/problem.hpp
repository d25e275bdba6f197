#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace slowman {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// One coefficient F_i of the epsilon series, with derivative access.
struct VectorFieldTerm {
  std::function<Vec(const Vec&)> eval;
  std::function<Mat(const Vec&)> jacobian;
  /// Second derivative applied to (u, v); optional, needed for order-2 corrections.
  std::function<Vec(const Vec&, const Vec&, const Vec&)> hessian_apply;

  [[nodiscard]] bool has_hessian() const noexcept { return static_cast<bool>(hessian_apply); }
};

/// A singularly perturbed problem z' = sum_i eps^i F_i(z).
///
/// `slow_chart` maps a point of a layer periodic orbit to the slow coordinate x
/// of that orbit (R^k). It is constant along each orbit of the family and is how
/// the shooting solver pins which orbit it wants. For standard-form problems it
/// is simply the slow component.
struct ProblemSpec {
  std::string name;
  int n = 0;
  int k = 0;
  std::vector<VectorFieldTerm> terms;
  std::map<std::string, double> params;

  std::function<Vec(const Vec&)> slow_chart;
  std::function<Mat(const Vec&)> slow_chart_jacobian;

  /// Throws ConfigError unless 1 <= k < n-1 and terms/evaluators are present.
  void validate() const;

  [[nodiscard]] int order() const noexcept { return static_cast<int>(terms.size()) - 1; }
  [[nodiscard]] const VectorFieldTerm& layer() const { return terms.front(); }
  [[nodiscard]] double param(const std::string& key) const;
};

/// Horner evaluation of sum_i eps^i F_i(z).
[[nodiscard]] Vec eval_series(const ProblemSpec& spec, const Vec& z, double eps);
/// Jacobian of the series in z.
[[nodiscard]] Mat jacobian_series(const ProblemSpec& spec, const Vec& z, double eps);

/// Central finite-difference Jacobian, used to check hand-coded derivatives.
[[nodiscard]] Mat finite_difference_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& z,
                                             double step = 1e-6);

// ---------------------------------------------------------------------------
// Built-in problems

/// Three-dimensional bent ellipsoid: F0 = T0 + N0 g0 and the single-entry F1.
/// Orbits of the layer flow foliate g0 = 0; x in (0, pi) labels them.
/// Evaluation with |z3 + rho z1^2| >= a (1 - 1e-12) raises DomainError.
[[nodiscard]] ProblemSpec builtin_bent_ellipsoid(double a, double rho);
/// The layer orbit through slow value x at phase phi (period 2 pi for every x).
[[nodiscard]] Vec bent_ellipsoid_orbit(double a, double rho, double x, double phi);

struct MltParams {
  double g_l = 0.5;
  double g_k = 2.0;
  double g_ca = 1.25;
  double v_l = -0.5;
  double v_k = -0.7;
  double v_ca = 1.0;
  double c1 = -0.01;
  double c2 = 0.15;
  double c3 = 0.1;
  double c4 = 0.16;
  double tau0 = 3.0;
  double k = -0.12;

  [[nodiscard]] double m_inf(double v) const;
  [[nodiscard]] double w_inf(double v) const;
  [[nodiscard]] double tau_w(double v) const;
};

/// Morris-Lecar-Terman model in (v, w, x); x is slow with x' = eps (k - v).
[[nodiscard]] ProblemSpec builtin_morris_lecar_terman(double k_param);
[[nodiscard]] ProblemSpec builtin_morris_lecar_terman(const MltParams& params);
[[nodiscard]] MltParams mlt_params_from(const ProblemSpec& spec);

/// Bifurcations of the layer equilibria (the critical manifold) of the MLT model.
struct CriticalManifoldPoint {
  double x = 0.0;
  double v = 0.0;
  enum class Kind { hopf, fold } kind = Kind::hopf;
};
/// Scans the critical manifold parametrised by v in [v_min, v_max] and returns
/// Hopf points (trace of the fast Jacobian crosses zero with positive determinant)
/// and folds (dx/dv = 0), each refined by bisection.
[[nodiscard]] std::vector<CriticalManifoldPoint> mlt_critical_manifold_bifurcations(
    const MltParams& p, double v_min = -0.6, double v_max = 0.6, int samples = 4000);

}  // namespace slowman
