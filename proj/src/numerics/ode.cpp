#include "slowman/numerics/ode.hpp"

#include <vector>

#include <boost/numeric/odeint.hpp>

#include "slowman/errors.hpp"

namespace slowman {

namespace odeint = boost::numeric::odeint;

OdeSolution integrate_to_times(const OdeRhs& rhs, const Eigen::VectorXd& y0, const std::vector<double>& times,
                               const OdeOptions& options) {
  OdeSolution out;
  if (times.empty()) return out;
  out.times.reserve(times.size());
  out.states.reserve(times.size());

  using State = std::vector<double>;
  const auto dim = static_cast<Eigen::Index>(y0.size());
  State state(y0.data(), y0.data() + dim);
  Eigen::VectorXd y(dim);
  Eigen::VectorXd dy(dim);
  auto system = [&](const State& s, State& ds, double t) {
    y = Eigen::Map<const Eigen::VectorXd>(s.data(), dim);
    rhs(t, y, dy);
    // a trajectory leaving every bounded region is treated like leaving the domain
    if (!dy.allFinite() || y.lpNorm<Eigen::Infinity>() > options.blowup)
      throw DomainError("trajectory diverged during integration");
    ds.assign(dy.data(), dy.data() + dim);
  };
  auto observer = [&](const State& s, double t) {
    out.times.push_back(t);
    out.states.emplace_back(Eigen::Map<const Eigen::VectorXd>(s.data(), dim));
  };

  if (times.size() == 1 || times.back() == times.front()) {
    for (double t : times) observer(state, t);
    out.stop_time = times.back();
    return out;
  }
  auto stepper = odeint::make_controlled(options.atol, options.rtol, odeint::runge_kutta_fehlberg78<State>());
  const double span = times.back() - times.front();
  const double dt = std::min(options.initial_step, span / 4.0);
  try {
    odeint::integrate_times(stepper, system, state, times.begin(), times.end(), dt, observer,
                            odeint::max_step_checker(options.max_steps));
  } catch (const DomainError&) {
    out.completed = false;
  } catch (const odeint::odeint_error&) {
    out.completed = false;
  }
  out.stop_time = out.times.empty() ? times.front() : out.times.back();
  return out;
}

}  // namespace slowman
