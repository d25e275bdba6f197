#pragma once

#include <vector>

#include "slowman/homological.hpp"
#include "slowman/numerics/ode.hpp"
#include "slowman/numerics/spline.hpp"

namespace slowman {

/// The skew-product flow x' = r_x(x, eps), phi' = r_phi(x, eps) with
/// r = (0, omega) + sum_i eps^i r_i, and the embedding Gamma0 + sum_i eps^i Gamma_i.
/// x-dependence is interpolated by not-a-knot splines through the grid nodes.
class ReducedModel {
 public:
  ReducedModel() = default;
  ReducedModel(const OrbitFamily& family, const std::vector<CorrectionOrderJ>& corrections);

  [[nodiscard]] int order() const noexcept { return static_cast<int>(r_.size()); }
  [[nodiscard]] int n() const noexcept { return n_; }
  [[nodiscard]] int phi_count() const noexcept { return phi_count_; }
  [[nodiscard]] const UniformGrid1D& x_grid() const noexcept { return x_grid_; }
  /// Throws DomainError outside the x-grid.
  [[nodiscard]] double r_x(double x, double eps) const;
  [[nodiscard]] double r_phi(double x, double eps) const;
  [[nodiscard]] double dr_x(double x, double eps) const;
  [[nodiscard]] double omega(double x) const;
  /// n x phi_count samples of Gamma(x, ., eps) on the phase nodes.
  [[nodiscard]] Mat embedding_nodes(double x, double eps) const;
  /// Gamma(x, phi, eps), periodic spline in phi.
  [[nodiscard]] Vec embedding(double x, double phi, double eps) const;

 private:
  int n_ = 0;
  int phi_count_ = 0;
  UniformGrid1D x_grid_;
  CubicSpline omega_;
  std::vector<CubicSpline> r_;      // order i: 2 x nx (r_x, r_phi)
  std::vector<CubicSpline> gamma_;  // order i: (n * phi) x nx
};

struct ReducedTrajectory {
  SampledCurve path;  // (x, phi mod 2 pi) x samples over [0, t_end]
  bool exited = false;
  double exit_time = 0.0;
};

/// Adaptive integration sampled at `samples` equally spaced times. Leaving the
/// x-grid ends the run with `exited` set and the samples truncated.
[[nodiscard]] ReducedTrajectory integrate_reduced(const ReducedModel& model, double x0, double phi0, double eps,
                                                  double t_end, int samples = 1001);

struct FullTrajectory {
  SampledCurve path;  // n x samples
  bool completed = true;
  double end_time = 0.0;
};

/// z' = sum_i eps^i F_i(z) at tolerance 1e-10. A domain exit truncates the result.
[[nodiscard]] FullTrajectory integrate_full(const ProblemSpec& spec, const Vec& z0, double eps, double t_end,
                                            int samples = 1001);

/// Distance from points to the layer orbits Gamma0(x, .) at arbitrary x in the grid.
class FibreLocator {
 public:
  FibreLocator() = default;
  explicit FibreLocator(const OrbitFamily& family);

  /// Grid minimum of |z - Gamma0(x, phi)| over the phase nodes, refined on the
  /// quadratic through the nearest node and its two neighbours.
  [[nodiscard]] double distance(const Vec& z, double x) const;
  [[nodiscard]] Mat orbit(double x) const;  // n x phi_count

 private:
  int n_ = 0;
  int phi_count_ = 0;
  CubicSpline gamma0_;
};

/// One-shot form of FibreLocator::distance.
[[nodiscard]] double fibre_distance(const Vec& z, const OrbitFamily& family, double x);

struct ShadowingReport {
  double eps = 0.0;
  double horizon = 0.0;
  double sup_fibre_distance = 0.0;
  SampledCurve distance_series;  // 1 x samples
  SampledCurve full_trajectory;
  SampledCurve reduced_trajectory;
  bool truncated = false;  // a trajectory left its domain before the horizon
  double ratio = 0.0;      // previous sup distance / this one (0 for the first)
};

struct ShadowingSetup {
  double x0 = 0.0;
  double phi0 = 0.0;
  Vec offset;          // z0 = Gamma0(x0, phi0) + eps * offset
  double c = 1.0;      // horizon C / eps
  int samples = 2001;
};

[[nodiscard]] std::vector<ShadowingReport> shadowing_experiment(const ProblemSpec& spec, const OrbitFamily& family,
                                                                const ReducedModel& model,
                                                                const std::vector<double>& eps_list,
                                                                const ShadowingSetup& setup,
                                                                ExecutionPolicy policy = ExecutionPolicy::parallel);

enum class Stability { stable, unstable };

struct SectionEquilibrium {
  double x = 0.0;
  Stability stability = Stability::stable;
  double slope = 0.0;  // d r_x / dx at the root
};

/// Sign changes of r_x(., eps) on a grid `refine` times finer than the x-grid,
/// each refined by bracketing to 1e-8 in x.
[[nodiscard]] std::vector<SectionEquilibrium> section_equilibria(const ReducedModel& model, double eps,
                                                                 int refine = 8);

[[nodiscard]] std::string to_string(Stability s);

}  // namespace slowman
