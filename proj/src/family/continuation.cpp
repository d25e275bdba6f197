#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "slowman/errors.hpp"
#include "slowman/numerics/linalg.hpp"
#include "slowman/orbit_family.hpp"

namespace slowman {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Solved {
  double x = 0.0;
  ShootResult orbit;
};

OrbitGuess predict(const Solved& cur, const Solved* prev, double x_next) {
  OrbitGuess g{cur.orbit.orbit.samples.col(0), cur.orbit.period};
  if (prev != nullptr && prev->x != cur.x) {
    const double s = (x_next - cur.x) / (cur.x - prev->x);
    g.state += s * (cur.orbit.orbit.samples.col(0) - prev->orbit.orbit.samples.col(0));
    g.period += s * (cur.orbit.period - prev->orbit.period);
    if (g.period <= 0.0) g.period = cur.orbit.period;
  }
  return g;
}

bool recoverable(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const ConvergenceError&) {
    return true;
  } catch (const DegenerateOrbit&) {
    return true;
  } catch (const DomainError&) {
    return true;
  }
}

// Tries one shooting solve; returns nothing on a failure that step halving can cure.
std::optional<ShootResult> try_shoot(const ProblemSpec& spec, double x, const OrbitGuess& guess,
                                     const SampledCurve& anchor, const ShootingOptions& opts) {
  try {
    return shoot_periodic_orbit(spec, x, guess, anchor, opts);
  } catch (...) {
    if (!recoverable(std::current_exception())) throw;
    return std::nullopt;
  }
}

BranchPoint branch_point(const ShootResult& r, int k) {
  BranchPoint p;
  p.x = r.x;
  p.period = r.period;
  const Mat& z = r.orbit.samples;
  p.amplitude = (z.rowwise().maxCoeff() - z.rowwise().minCoeff()).maxCoeff();
  auto mult = floquet_multipliers(r.phi.back());
  for (std::size_t i = static_cast<std::size_t>(k) + 1; i < mult.size(); ++i) p.nontrivial.push_back(std::abs(mult[i]));
  return p;
}

// Root of the least-squares line through (x_i, y_i).
std::optional<double> linear_root(const std::vector<double>& xs, const std::vector<double>& ys) {
  const auto m = static_cast<double>(xs.size());
  if (xs.size() < 2) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double x0 = xs.back();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - x0;
    sx += dx;
    sy += ys[i];
    sxx += dx * dx;
    sxy += dx * ys[i];
  }
  const double det = m * sxx - sx * sx;
  if (det == 0.0) return std::nullopt;
  const double slope = (m * sxy - sx * sy) / det;
  const double icpt = (sy - slope * sx) / m;
  if (slope == 0.0) return std::nullopt;
  return x0 - icpt / slope;
}

}  // namespace

std::string to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::hopf: return "HOPF";
    case BoundaryKind::snpo: return "SNPO";
    case BoundaryKind::snic: return "SNIC";
  }
  return "?";
}

OrbitFamily continue_family(const ProblemSpec& spec, const ShootResult& seed, const UniformGrid1D& x_grid,
                            const ContinuationOptions& options) {
  const auto& shoot = options.shooting;
  if (seed.orbit.count() != shoot.phi_count) throw InvalidGrid("seed orbit does not use the shooting phase grid");
  const int count = x_grid.count();
  std::vector<std::optional<ShootResult>> nodes(static_cast<std::size_t>(count));

  // nodes at or above the seed, then those below, each marching away from it
  int first_up = 0;
  while (first_up < count && x_grid.value(first_up) < seed.x) ++first_up;
  std::vector<std::vector<int>> sweeps(2);
  for (int i = first_up; i < count; ++i) sweeps[0].push_back(i);
  for (int i = first_up - 1; i >= 0; --i) sweeps[1].push_back(i);

  for (const auto& sweep : sweeps) {
    Solved last_node{seed.x, seed};
    Solved cur = last_node;
    std::optional<Solved> prev;
    for (int idx : sweep) {
      const double target = x_grid.value(idx);
      double step = std::copysign(std::min(std::abs(target - cur.x), options.max_step), target - cur.x);
      while (true) {
        const double remaining = target - cur.x;
        const bool at_node = std::abs(step) >= std::abs(remaining);
        const double x_try = at_node ? target : cur.x + step;
        const OrbitGuess guess = predict(cur, prev ? &*prev : nullptr, x_try);
        const SampledCurve& anchor = at_node ? last_node.orbit.orbit : cur.orbit.orbit;
        auto r = try_shoot(spec, x_try, guess, anchor, shoot);
        if (!r) {
          step *= 0.5;
          if (std::abs(step) < options.min_step) {
            std::ostringstream os;
            os << "continuation stalled near x = " << cur.x << " heading to " << target;
            throw ContinuationStall(os.str(), last_node.x);
          }
          continue;
        }
        prev = cur;
        cur = Solved{x_try, std::move(*r)};
        if (at_node) {
          last_node = cur;
          break;
        }
        step = std::copysign(std::min(2.0 * std::abs(step), options.max_step), step);
      }
      nodes[static_cast<std::size_t>(idx)] = last_node.orbit;
    }
  }

  OrbitFamily family;
  family.n = spec.n;
  family.k = spec.k;
  family.x_grid = x_grid;
  family.phi_count = shoot.phi_count;
  Mat tau(1, count);
  for (int i = 0; i < count; ++i) {
    auto& r = *nodes[static_cast<std::size_t>(i)];
    tau(0, i) = r.period;
    family.gamma0.push_back(std::move(r.orbit.samples));
    family.transition.push_back(std::move(r.phi));
  }
  family.tau = SampledCurve(x_grid, tau);
  family.omega = SampledCurve(x_grid, (kTwoPi / tau.array()).matrix());
  return family;
}

BranchTrace trace_branch(const ProblemSpec& spec, const ShootResult& seed, double x_target,
                         const ContinuationOptions& options) {
  BranchTrace trace;
  Solved cur{seed.x, seed};
  std::optional<Solved> prev;
  trace.points.push_back(branch_point(seed, spec.k));
  trace.last_good_x = seed.x;
  double step = std::copysign(options.initial_step, x_target - seed.x);
  ShootingOptions shoot = options.shooting;
  while (cur.x != x_target) {
    const bool last = std::abs(step) >= std::abs(x_target - cur.x);
    const double x_try = last ? x_target : cur.x + step;
    std::optional<ShootResult> r;
    try {
      r = shoot_periodic_orbit(spec, x_try, predict(cur, prev ? &*prev : nullptr, x_try), cur.orbit.orbit, shoot);
    } catch (const DegenerateOrbit& e) {
      // the period limit is only meaningful when the period was already large
      if (cur.orbit.period > 0.25 * shoot.period_max) {
        trace.period_limit = true;
        trace.stop_reason = e.what();
        break;
      }
    } catch (const ConvergenceError&) {
    } catch (const DomainError&) {
    }
    if (!r) {
      step *= 0.5;
      if (std::abs(step) < options.min_step) {
        trace.stalled = true;
        trace.stop_reason = "step underflow";
        break;
      }
      continue;
    }
    prev = cur;
    cur = Solved{x_try, std::move(*r)};
    trace.points.push_back(branch_point(cur.orbit, spec.k));
    trace.last_good_x = cur.x;
    step = std::copysign(std::min(1.5 * std::abs(step), options.max_step), step);
  }
  if (trace.stop_reason.empty()) trace.stop_reason = "reached target";
  return trace;
}

std::vector<FamilyBoundary> detect_family_boundaries(const BranchTrace& trace) {
  std::vector<FamilyBoundary> out;
  const auto& pts = trace.points;
  if (pts.size() < 4) return out;
  const double dir = pts.back().x > pts.front().x ? 1.0 : -1.0;
  const std::size_t window = std::min<std::size_t>(6, pts.size());
  const auto tail = pts.end() - static_cast<std::ptrdiff_t>(window);
  const double span = std::abs(pts.back().x - pts.front().x);
  auto ahead = [&](double x) {
    // extrapolated boundary must sit beyond the last point, within reach
    const double d = dir * (x - pts.back().x);
    return d > -1e-9 && d < 0.1 * span + 1e-3;
  };

  std::vector<double> xs, om2, sn, amp2;
  double omega_max = 0.0, amp_max = 0.0;
  for (const auto& p : pts) {
    omega_max = std::max(omega_max, kTwoPi / p.period);
    amp_max = std::max(amp_max, p.amplitude);
  }
  double rho_end = 0.0;
  for (auto it = tail; it != pts.end(); ++it) {
    xs.push_back(it->x);
    const double om = kTwoPi / it->period;
    om2.push_back(om * om);
    const double rho = it->nontrivial.empty() ? 0.0 : *std::max_element(it->nontrivial.begin(), it->nontrivial.end());
    sn.push_back((1.0 - rho) * (1.0 - rho));
    amp2.push_back(it->amplitude * it->amplitude);
    rho_end = rho;
  }
  const double rho_start = pts[static_cast<std::size_t>(tail - pts.begin())].nontrivial.empty()
                               ? 0.0
                               : *std::max_element(tail->nontrivial.begin(), tail->nontrivial.end());

  const double omega_end = kTwoPi / pts.back().period;
  if (omega_end < 0.25 * omega_max && om2.front() > om2.back()) {
    if (auto x = linear_root(xs, om2); x && ahead(*x)) out.push_back({*x, BoundaryKind::snic});
  } else if (rho_end > 0.3 && rho_end > rho_start) {
    if (auto x = linear_root(xs, sn); x && ahead(*x)) out.push_back({*x, BoundaryKind::snpo});
  } else if (pts.back().amplitude < 0.1 * amp_max) {
    if (auto x = linear_root(xs, amp2); x && ahead(*x)) out.push_back({*x, BoundaryKind::hopf});
  }
  return out;
}

std::vector<FamilyBoundary> detect_family_boundaries(const OrbitFamily& family) {
  std::vector<FamilyBoundary> out;
  const int count = family.x_count();
  std::vector<BranchPoint> pts;
  for (int i = 0; i < count; ++i) {
    BranchPoint p;
    p.x = family.x_grid.value(i);
    p.period = family.tau.samples(0, i);
    const Mat& z = family.gamma0[static_cast<std::size_t>(i)];
    p.amplitude = (z.rowwise().maxCoeff() - z.rowwise().minCoeff()).maxCoeff();
    auto mult = floquet_multipliers(family.monodromy(i));
    for (std::size_t j = static_cast<std::size_t>(family.k) + 1; j < mult.size(); ++j)
      p.nontrivial.push_back(std::abs(mult[j]));
    pts.push_back(std::move(p));
  }
  const int mid = count / 2;
  BranchTrace up, down;
  up.points.assign(pts.begin() + mid, pts.end());
  down.points.assign(pts.rbegin() + (count - mid - 1), pts.rend());
  for (const auto* t : {&down, &up}) {
    auto found = detect_family_boundaries(*t);
    out.insert(out.end(), found.begin(), found.end());
  }
  return out;
}

}  // namespace slowman
