#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slowman/numerics/grid.hpp"
#include "slowman/numerics/ode.hpp"
#include "slowman/parallel.hpp"
#include "slowman/problem.hpp"

namespace slowman {

/// Discretised family of layer periodic orbits Gamma0(x, phi) over a uniform
/// x-grid, with the period and frequency maps and the transition matrices
/// Phi(x, phi / omega(x), 0) at every phase node.
struct OrbitFamily {
  int n = 0;
  int k = 0;
  UniformGrid1D x_grid;
  int phi_count = 0;
  std::vector<Mat> gamma0;                   // [x] n x phi_count
  std::vector<std::vector<Mat>> transition;  // [x][phi] n x n
  SampledCurve tau;                          // 1 x x_count
  SampledCurve omega;                        // 1 x x_count

  [[nodiscard]] int x_count() const noexcept { return x_grid.count(); }
  [[nodiscard]] UniformGrid1D phi_grid() const { return phase_grid(phi_count); }
  [[nodiscard]] const Mat& monodromy(int xi) const {
    return transition[static_cast<std::size_t>(xi)].back();
  }
};

struct FamilyTolerances {
  double closure = 1e-9;      // |gamma0(x,0) - gamma0(x,2pi)|
  double conjugacy = 1e-6;    // |omega d_phi Gamma0 - F0(Gamma0)| with spectral derivative
  double tau_min = 1e-3;
  double tau_max = 1e4;
};

/// Invariant report for a family; `ok()` when every check is within tolerance.
struct FamilyCheck {
  double max_closure = 0.0;
  double max_conjugacy = 0.0;
  double min_det_transition = 0.0;
  double tau_min = 0.0;
  double tau_max = 0.0;
  bool identity_at_zero = true;
  [[nodiscard]] bool ok(const FamilyTolerances& tol) const;
};

[[nodiscard]] FamilyCheck check_family(const ProblemSpec& spec, const OrbitFamily& family);

using Embedding = std::function<Vec(double x, double phi)>;

/// Samples a closed-form embedding and integrates the variational equation
/// along each orbit. Throws InconsistentEmbedding when the conjugacy residual
/// exceeds the tolerance.
[[nodiscard]] OrbitFamily family_from_closed_form(const ProblemSpec& spec, const Embedding& embedding,
                                                  const std::function<double(double)>& tau_map,
                                                  const UniformGrid1D& x_grid, int phi_count,
                                                  ExecutionPolicy policy = ExecutionPolicy::parallel,
                                                  const FamilyTolerances& tol = {},
                                                  const OdeOptions& ode = {});

// ---------------------------------------------------------------------------
// Shooting

struct ShootingOptions {
  int phi_count = 256;
  double bvp_tol = 1e-10;
  int max_iter = 25;
  double period_min = 1e-3;
  double period_max = 1e4;
  OdeOptions ode{};
};

/// A converged layer periodic orbit at slow value x, sampled on the rescaled
/// time grid t~ in [0, 1] (equivalently phi in [0, 2pi]).
struct ShootResult {
  double x = 0.0;
  double period = 0.0;
  SampledCurve orbit;      // n x phi_count over [0, 1]
  std::vector<Mat> phi;    // transition matrices at the same nodes
  double residual = 0.0;
  int iterations = 0;
};

struct OrbitGuess {
  Vec state;
  double period = 0.0;
};

/// Forward-simulates the layer flow from `start` for `settle_time` and
/// measures the return time to the hyperplane through the end point normal to
/// F0. Gives a Newton seed on an attracting orbit.
[[nodiscard]] OrbitGuess guess_from_simulation(const ProblemSpec& spec, const Vec& start, double settle_time,
                                               double max_period, const OdeOptions& ode = {});

/// Newton single shooting on dz/dt~ = T F0(z), z(0) = z(1), integral phase
/// condition against `anchor` (or the guess trajectory on a first solve) and
/// slow_chart(z(0)) = x.
[[nodiscard]] ShootResult shoot_periodic_orbit(const ProblemSpec& spec, double x, const OrbitGuess& guess,
                                               const std::optional<SampledCurve>& anchor,
                                               const ShootingOptions& options = {});

/// Integrates the layer flow plus variational equation from `state` over one
/// period, sampled on phi_count nodes of [0, 1].
[[nodiscard]] ShootResult integrate_orbit(const ProblemSpec& spec, double x, const Vec& state, double period,
                                          int phi_count, const OdeOptions& ode = {});

// ---------------------------------------------------------------------------
// Continuation

struct ContinuationOptions {
  ShootingOptions shooting{};
  double min_step = 1e-7;
  double max_step = 2e-3;
  double initial_step = 5e-4;
};

/// Natural-parameter continuation from a converged seed onto every node of
/// x_grid (the seed may lie anywhere inside the grid). Failed Newton solves
/// halve the step; grid-node solves anchor their phase on the previous grid
/// node so the family is smooth in x. Throws ContinuationStall below min_step.
[[nodiscard]] OrbitFamily continue_family(const ProblemSpec& spec, const ShootResult& seed,
                                          const UniformGrid1D& x_grid, const ContinuationOptions& options = {});

/// One point of an adaptive branch trace.
struct BranchPoint {
  double x = 0.0;
  double period = 0.0;
  double amplitude = 0.0;           // max-norm diameter of the orbit
  std::vector<double> nontrivial;   // |rho| of the n-k-1 nontrivial multipliers
};

struct BranchTrace {
  std::vector<BranchPoint> points;  // ordered along the continuation direction
  bool stalled = false;
  bool period_limit = false;
  double last_good_x = 0.0;
  std::string stop_reason;
};

/// Adaptive natural-parameter continuation from the seed toward x_target,
/// recording periods, amplitudes and multipliers. Stops (without throwing) on
/// step underflow, on hitting the period limit, or on reaching x_target.
[[nodiscard]] BranchTrace trace_branch(const ProblemSpec& spec, const ShootResult& seed, double x_target,
                                       const ContinuationOptions& options = {});

enum class BoundaryKind { hopf, snpo, snic };

struct FamilyBoundary {
  double x = 0.0;
  BoundaryKind kind = BoundaryKind::snpo;
};

[[nodiscard]] std::string to_string(BoundaryKind kind);

/// SNPO where a nontrivial multiplier approaches 1, SNIC where omega -> 0 with a
/// diverging slope, HOPF where the amplitude collapses; locations are
/// extrapolated from the end of the trace.
[[nodiscard]] std::vector<FamilyBoundary> detect_family_boundaries(const BranchTrace& trace);
/// Same diagnostics evaluated on a finished family (both ends).
[[nodiscard]] std::vector<FamilyBoundary> detect_family_boundaries(const OrbitFamily& family);

/// Multipliers of a monodromy sorted by distance from 1.
[[nodiscard]] std::vector<std::complex<double>> floquet_multipliers(const Mat& monodromy);

// ---------------------------------------------------------------------------
// Persistence

void write_family(std::ostream& os, const OrbitFamily& family);
[[nodiscard]] OrbitFamily read_family(std::istream& is);

}  // namespace slowman
