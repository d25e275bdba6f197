#pragma once

#include <numbers>

#include "slowman/oracle/ellipsoid_oracle.hpp"
#include "slowman/homological.hpp"
#include "slowman/orbit_family.hpp"

namespace fixtures {

inline const slowman::oracle::EllipsoidParams kEll{};

inline slowman::OrbitFamily ellipsoid_family(const slowman::UniformGrid1D& xg, int phi_count) {
  using namespace slowman;
  const auto spec = builtin_bent_ellipsoid(kEll.a, kEll.rho);
  return family_from_closed_form(
      spec, [](double x, double phi) -> Vec { return oracle::gamma0(kEll, x, phi); },
      [](double) { return 2 * std::numbers::pi; }, xg, phi_count);
}

/// MLT orbits on [0.1, 0.14] (9 nodes, 256 phases), continued from x = 0.12.
inline const slowman::OrbitFamily& mlt_family() {
  using namespace slowman;
  static const OrbitFamily fam = [] {
    const auto spec = builtin_morris_lecar_terman(-0.12);
    ShootingOptions o;
    o.phi_count = 256;
    const auto g = guess_from_simulation(spec, Eigen::Vector3d(0.3, 0.0, 0.12), 200.0, 100.0);
    const auto seed = shoot_periodic_orbit(spec, 0.12, g, std::nullopt, o);
    ContinuationOptions co;
    co.shooting = o;
    return continue_family(spec, seed, UniformGrid1D(0.1, 0.14, 9), co);
  }();
  return fam;
}

/// Family, frames and projectors for one system.
struct Pipeline {
  slowman::ProblemSpec spec;
  slowman::OrbitFamily fam;
  std::vector<slowman::FloquetFrame> frames;
  slowman::ProjectorField field;
};

inline Pipeline ellipsoid_pipeline(int nx = 24, int np = 256) {
  const slowman::UniformGrid1D xg(0.1 * std::numbers::pi, 0.9 * std::numbers::pi, nx);
  Pipeline p{slowman::builtin_bent_ellipsoid(kEll.a, kEll.rho), ellipsoid_family(xg, np), {}, {}};
  p.frames = slowman::compute_frames(p.spec, p.fam);
  p.field = slowman::build_projector_field(p.frames);
  return p;
}

inline const Pipeline& mlt_pipeline() {
  static const Pipeline p = [] {
    Pipeline q{slowman::builtin_morris_lecar_terman(-0.12), mlt_family(), {}, {}};
    q.frames = slowman::compute_frames(q.spec, q.fam);
    q.field = slowman::build_projector_field(q.frames);
    return q;
  }();
  return p;
}

/// Classical first-order average of x' = k - v over the attracting layer cycle
/// at frozen x: fixed-step RK4, settled for `settle` time units, then averaged
/// over whole periods between upward crossings of v = 0.
inline double classical_average(const slowman::ProblemSpec& spec, double x, double settle = 300.0,
                                int periods = 4, double dt = 2e-3) {
  using slowman::Vec;
  const double k = spec.param("k");
  Vec z(3);
  z << 0.3, 0.0, x;
  auto f = [&](const Vec& s) { return spec.layer().eval(s); };
  auto step = [&](Vec& s) {
    const Vec k1 = f(s), k2 = f(s + 0.5 * dt * k1), k3 = f(s + 0.5 * dt * k2), k4 = f(s + dt * k3);
    s += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  };
  for (double t = 0; t < settle; t += dt) step(z);
  // align to an upward crossing of v = 0, then integrate whole periods
  auto to_crossing = [&](double* acc, double* time) {
    bool below = false;
    while (true) {
      const Vec prev = z;
      step(z);
      if (acc) *acc += 0.5 * dt * ((k - prev(0)) + (k - z(0)));
      if (time) *time += dt;
      if (prev(0) < 0.0) below = true;
      if (below && prev(0) < 0.0 && z(0) >= 0.0) return;
    }
  };
  to_crossing(nullptr, nullptr);
  double acc = 0.0, time = 0.0;
  for (int i = 0; i < periods; ++i) to_crossing(&acc, &time);
  return acc / time;
}

}  // namespace fixtures
