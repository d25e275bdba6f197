#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace slowman {

/// Right-hand side y' = f(t, y).
using OdeRhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt)>;

struct OdeOptions {
  double rtol = 1e-12;
  double atol = 1e-12;
  double initial_step = 1e-3;
  int max_steps = 200000;  // per output interval
  double blowup = 1e8;     // |y|_inf beyond this aborts the run
};

/// States at requested output times; `completed` is false when the right-hand
/// side raised DomainError, the state diverged, or the step budget ran out, in which case `states` stops at the last good time.
struct OdeSolution {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  bool completed = true;
  double stop_time = 0.0;
};

/// Adaptive embedded Runge-Kutta (Fehlberg 7(8)) integration hitting every
/// entry of `times` exactly. `times` must be non-decreasing; times[0] is the
/// initial time.
[[nodiscard]] OdeSolution integrate_to_times(const OdeRhs& rhs, const Eigen::VectorXd& y0,
                                             const std::vector<double>& times,
                                             const OdeOptions& options = {});

}  // namespace slowman
