#include "slowman/reduced.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "slowman/errors.hpp"

namespace slowman {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// (n * phi) x nx matrix with node xi in column xi.
Mat stack_nodes(const std::vector<Mat>& per_x) {
  const auto rows = per_x.front().size();
  Mat out(rows, static_cast<Eigen::Index>(per_x.size()));
  for (std::size_t i = 0; i < per_x.size(); ++i)
    out.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const Vec>(per_x[i].data(), rows);
  return out;
}

SampledCurve curve_from(const std::vector<double>& times, const std::vector<Vec>& states, std::size_t count) {
  if (count < 3) return {};
  Mat s(states.front().size(), static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) s.col(static_cast<Eigen::Index>(i)) = states[i];
  return {UniformGrid1D(times.front(), times[count - 1], static_cast<int>(count)), s};
}

std::vector<double> sample_times(double t_end, int samples) {
  if (!(t_end > 0.0) || samples < 3) throw ConfigError("trajectory needs t_end > 0 and at least 3 samples");
  const UniformGrid1D g(0.0, t_end, samples);
  std::vector<double> t(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) t[static_cast<std::size_t>(i)] = g.value(i);
  return t;
}

}  // namespace

ReducedModel::ReducedModel(const OrbitFamily& family, const std::vector<CorrectionOrderJ>& corrections)
    : n_(family.n), phi_count_(family.phi_count), x_grid_(family.x_grid) {
  omega_ = CubicSpline(x_grid_, family.omega.samples, SplineEnd::not_a_knot);
  gamma_.emplace_back(x_grid_, stack_nodes(family.gamma0), SplineEnd::not_a_knot);
  for (std::size_t i = 0; i < corrections.size(); ++i) {
    const auto& c = corrections[i];
    if (c.order != static_cast<int>(i) + 1) throw ConfigError("corrections must be ordered 1, 2, ...");
    if (c.r.rows() != 2) throw UnsupportedConfiguration("the reduced model is written for k = 1");
    r_.emplace_back(x_grid_, c.r, SplineEnd::not_a_knot);
    gamma_.emplace_back(x_grid_, stack_nodes(c.gamma), SplineEnd::not_a_knot);
  }
}

double ReducedModel::r_x(double x, double eps) const {
  double out = 0.0, e = 1.0;
  for (const auto& s : r_) out += (e *= eps) * s.value(x)(0);
  if (r_.empty() && !x_grid_.contains(x)) throw DomainError("x outside the reduced model grid");
  return out;
}

double ReducedModel::dr_x(double x, double eps) const {
  double out = 0.0, e = 1.0;
  for (const auto& s : r_) out += (e *= eps) * s.derivative(x)(0);
  return out;
}

double ReducedModel::r_phi(double x, double eps) const {
  double out = omega(x), e = 1.0;
  for (const auto& s : r_) out += (e *= eps) * s.value(x)(1);
  return out;
}

double ReducedModel::omega(double x) const { return omega_.value(x)(0); }

Mat ReducedModel::embedding_nodes(double x, double eps) const {
  Vec v = gamma_.front().value(x);
  double e = 1.0;
  for (std::size_t i = 1; i < gamma_.size(); ++i) v += (e *= eps) * gamma_[i].value(x);
  return Eigen::Map<const Mat>(v.data(), n_, phi_count_);
}

Vec ReducedModel::embedding(double x, double phi, double eps) const {
  Mat nodes = embedding_nodes(x, eps);
  nodes.col(phi_count_ - 1) = nodes.col(0);
  return CubicSpline(phase_grid(phi_count_), nodes, SplineEnd::periodic).value(phi);
}

ReducedTrajectory integrate_reduced(const ReducedModel& model, double x0, double phi0, double eps, double t_end,
                                    int samples) {
  const auto times = sample_times(t_end, samples);
  const OdeRhs rhs = [&](double, const Vec& y, Vec& dy) {
    dy.resize(2);
    dy << model.r_x(y(0), eps), model.r_phi(y(0), eps);
  };
  OdeOptions o;
  o.rtol = o.atol = 1e-11;
  auto sol = integrate_to_times(rhs, Eigen::Vector2d(x0, phi0), times, o);
  for (auto& s : sol.states) s(1) = std::fmod(std::fmod(s(1), kTwoPi) + kTwoPi, kTwoPi);
  ReducedTrajectory out;
  out.exited = !sol.completed;
  out.exit_time = sol.completed ? t_end : sol.stop_time;
  out.path = curve_from(sol.times, sol.states, sol.states.size());
  return out;
}

FullTrajectory integrate_full(const ProblemSpec& spec, const Vec& z0, double eps, double t_end, int samples) {
  const auto times = sample_times(t_end, samples);
  const OdeRhs rhs = [&](double, const Vec& y, Vec& dy) { dy = eval_series(spec, y, eps); };
  OdeOptions o;
  o.rtol = o.atol = 1e-10;
  const auto sol = integrate_to_times(rhs, z0, times, o);
  FullTrajectory out;
  out.completed = sol.completed;
  out.end_time = sol.completed ? t_end : sol.stop_time;
  out.path = curve_from(sol.times, sol.states, sol.states.size());
  return out;
}

FibreLocator::FibreLocator(const OrbitFamily& family)
    : n_(family.n), phi_count_(family.phi_count),
      gamma0_(family.x_grid, stack_nodes(family.gamma0), SplineEnd::not_a_knot) {}

Mat FibreLocator::orbit(double x) const {
  const Vec v = gamma0_.value(x);
  return Eigen::Map<const Mat>(v.data(), n_, phi_count_);
}

double FibreLocator::distance(const Vec& z, double x) const {
  const Mat o = orbit(x);
  const int m = phi_count_ - 1;  // distinct nodes
  const Eigen::VectorXd d2 = (o.leftCols(m).colwise() - z).colwise().squaredNorm().transpose();
  Eigen::Index p = 0;
  const double d0 = d2.minCoeff(&p);
  // quadratic through the orbit nodes p-1, p, p+1, parametrised by s in [-1, 1]
  const Vec c0 = o.col(p);
  const Vec cm = o.col((p + m - 1) % m);
  const Vec cp = o.col((p + 1) % m);
  const Vec c1 = 0.5 * (cp - cm);
  const Vec c2 = 0.5 * (cp + cm) - c0;
  const auto dist2 = [&](double s) { return (c0 + s * c1 + s * s * c2 - z).squaredNorm(); };
  const auto best = boost::math::tools::brent_find_minima(dist2, -1.0, 1.0, 40);
  return std::sqrt(std::max(std::min(best.second, d0), 0.0));
}

double fibre_distance(const Vec& z, const OrbitFamily& family, double x) {
  return FibreLocator(family).distance(z, x);
}

std::vector<ShadowingReport> shadowing_experiment(const ProblemSpec& spec, const OrbitFamily& family,
                                                  const ReducedModel& model, const std::vector<double>& eps_list,
                                                  const ShadowingSetup& setup, ExecutionPolicy policy) {
  for (double e : eps_list)
    if (!(e > 0.0)) throw ConfigError("shadowing needs positive eps values");
  if (setup.offset.size() != spec.n) throw ConfigError("shadowing offset has the wrong dimension");
  const FibreLocator locator(family);
  const Vec base = model.embedding(setup.x0, setup.phi0, 0.0);
  std::vector<ShadowingReport> out(eps_list.size());
  for_each_slice(eps_list.size(), policy, [&](std::size_t i) {
    auto& rep = out[i];
    rep.eps = eps_list[i];
    rep.horizon = setup.c / rep.eps;
    const auto full = integrate_full(spec, base + rep.eps * setup.offset, rep.eps, rep.horizon, setup.samples);
    const auto red = integrate_reduced(model, setup.x0, setup.phi0, rep.eps, rep.horizon, setup.samples);
    rep.truncated = !full.completed || red.exited;
    const int m = std::min(full.path.count(), red.path.count());
    if (full.path.samples.size() == 0 || red.path.samples.size() == 0 || m < 3) {
      rep.truncated = true;
      return;
    }
    Mat d(1, m);
    for (int s = 0; s < m; ++s) d(0, s) = locator.distance(full.path.samples.col(s), red.path.samples(0, s));
    rep.distance_series = SampledCurve(UniformGrid1D(0.0, full.path.grid.value(m - 1), m), d);
    rep.sup_fibre_distance = d.maxCoeff();
    rep.full_trajectory = full.path;
    rep.reduced_trajectory = red.path;
  });
  for (std::size_t i = 1; i < out.size(); ++i)
    out[i].ratio = out[i].sup_fibre_distance > 0 ? out[i - 1].sup_fibre_distance / out[i].sup_fibre_distance : 0.0;
  return out;
}

std::vector<SectionEquilibrium> section_equilibria(const ReducedModel& model, double eps, int refine) {
  const auto& g = model.x_grid();
  const UniformGrid1D fine(g.start(), g.end(), (g.count() - 1) * std::max(refine, 1) + 1);
  std::vector<double> f(static_cast<std::size_t>(fine.count()));
  for (int i = 0; i < fine.count(); ++i) f[static_cast<std::size_t>(i)] = model.r_x(fine.value(i), eps);
  std::vector<SectionEquilibrium> out;
  auto record = [&](double x) {
    const double slope = model.dr_x(x, eps);
    out.push_back({x, slope < 0 ? Stability::stable : Stability::unstable, slope});
  };
  for (int i = 0; i + 1 < fine.count(); ++i) {
    const double a = f[static_cast<std::size_t>(i)], b = f[static_cast<std::size_t>(i + 1)];
    if (a == 0.0 && i > 0 && f[static_cast<std::size_t>(i - 1)] * b < 0) {
      record(fine.value(i));
    } else if (a * b < 0) {
      std::uintmax_t iters = 100;
      const auto root = boost::math::tools::toms748_solve(
          [&](double x) { return model.r_x(x, eps); }, fine.value(i), fine.value(i + 1), a, b,
          [](double lo, double hi) { return hi - lo <= 1e-10; }, iters);
      record(0.5 * (root.first + root.second));
    }
  }
  return out;
}

std::string to_string(Stability s) { return s == Stability::stable ? "stable" : "unstable"; }

}  // namespace slowman
