#include <doctest.h>

#include <cmath>
#include <numbers>

#include "slowman/errors.hpp"
#include "slowman/reduced.hpp"

#include "fixtures.hpp"

using namespace slowman;
using fixtures::kEll;
using std::numbers::pi;

namespace {

struct Reduced {
  fixtures::Pipeline p;
  CorrectionOrderJ c1;
  ReducedModel model;
};

const Reduced& ellipsoid_reduced() {
  static const Reduced r = [] {
    Reduced q{fixtures::ellipsoid_pipeline(64, 256), {}, {}};
    q.c1 = solve_order(q.p.spec, q.p.fam, q.p.frames, q.p.field, {}, 1);
    q.model = ReducedModel(q.p.fam, {q.c1});
    return q;
  }();
  return r;
}

const Reduced& mlt_reduced() {
  static const Reduced r = [] {
    Reduced q{fixtures::mlt_pipeline(), {}, {}};
    q.c1 = solve_order(q.p.spec, q.p.fam, q.p.frames, q.p.field, {}, 1);
    q.model = ReducedModel(q.p.fam, {q.c1});
    return q;
  }();
  return r;
}

double ellipsoid_g(const Vec& z) {
  const double q = z(2) + kEll.rho * z(0) * z(0);
  return z(0) * z(0) + z(1) * z(1) + q * q - kEll.a * kEll.a;
}

}  // namespace

TEST_CASE("reduced model at eps = 0 is the layer flow in the chart") {
  const auto& r = ellipsoid_reduced();
  const double x = 1.1;
  CHECK(r.model.r_x(x, 0.0) == 0.0);
  CHECK(std::abs(r.model.r_phi(x, 0.0) - 1.0) < 1e-12);
  CHECK((r.model.embedding(x, 0.7, 0.0) - oracle::gamma0(kEll, x, 0.7)).cwiseAbs().maxCoeff() < 1e-7);
  const auto traj = integrate_reduced(r.model, x, 0.5, 0.0, 10.0, 101);
  REQUIRE_FALSE(traj.exited);
  for (int s = 0; s < traj.path.count(); ++s) {
    CHECK(traj.path.samples(0, s) == x);
    const double expect = std::fmod(0.5 + traj.path.grid.value(s), 2 * pi);
    CHECK(std::abs(std::remainder(traj.path.samples(1, s) - expect, 2 * pi)) < 1e-9);
  }
  const double eps = 0.03;
  const Vec gamma = r.model.embedding(x, 0.4, eps);
  const Vec expect = oracle::gamma0(kEll, x, 0.4) + eps * oracle::gamma1(kEll, x, 0.4);
  CHECK((gamma - expect).cwiseAbs().maxCoeff() < 1e-7);
  CHECK(std::abs(r.model.r_x(x, eps) - eps * oracle::r1(kEll, x)(0)) < 1e-8);
}

TEST_CASE("ellipsoid reduced and full dynamics") {
  const auto& r = ellipsoid_reduced();
  SUBCASE("slow drift towards pi/6") {
    const auto traj = integrate_reduced(r.model, pi / 3, 0.0, 0.05, 4000.0, 401);
    REQUIRE_FALSE(traj.exited);
    for (int s = 1; s < traj.path.count(); ++s) CHECK(traj.path.samples(0, s) < traj.path.samples(0, s - 1));
    CHECK(std::abs(traj.path.samples(0, traj.path.count() - 1) - pi / 6) < 1e-3);
  }
  SUBCASE("layer flow keeps the manifold") {
    const auto full = integrate_full(r.p.spec, oracle::gamma0(kEll, 1.0, 0.3), 0.0, 30.0, 301);
    REQUIRE(full.completed);
    for (int s = 0; s < full.path.count(); ++s) CHECK(std::abs(ellipsoid_g(full.path.samples.col(s))) <= 1e-8);
  }
  SUBCASE("perturbed start contracts, then drifts") {
    const Vec z0 = oracle::gamma0(kEll, pi / 3, 0.0) + Eigen::Vector3d(-0.1, -0.3, 0.5);
    const auto full = integrate_full(r.p.spec, z0, 0.05, 600.0, 601);
    REQUIRE(full.completed);
    const FibreLocator loc(r.p.fam);
    const auto chart = [&](const Vec& z) { return r.p.spec.slow_chart(z)(0); };
    CHECK(std::abs(ellipsoid_g(full.path.samples.col(0))) > 0.1);
    CHECK(std::abs(ellipsoid_g(full.path.samples.col(20))) < 0.05);
    const Vec z_end = full.path.samples.col(600);
    CHECK(chart(z_end) < pi / 3 - 0.1);
    CHECK(loc.distance(z_end, chart(z_end)) < 0.05);
  }
  SUBCASE("pushforward of the section flow") {
    const double eps = 0.05;
    const auto traj = integrate_reduced(r.model, 1.2, 0.0, eps, 200.0, 201);
    const double dt = traj.path.grid.spacing();
    for (int s = 1; s + 1 < traj.path.count(); s += 20) {
      const double x = traj.path.samples(0, s);
      const Vec y0 = r.model.embedding(traj.path.samples(0, s - 1), 0.0, 0.0);
      const Vec y1 = r.model.embedding(traj.path.samples(0, s + 1), 0.0, 0.0);
      const Vec push = oracle::v_s(kEll, x, 0.0) * r.model.r_x(x, eps);
      CHECK(((y1 - y0) / (2 * dt) - push).norm() <= 1e-3 * push.norm());
    }
  }
}

TEST_CASE("fibre distance") {
  const auto& r = ellipsoid_reduced();
  const FibreLocator loc(r.p.fam);
  const double x = 1.0;
  CHECK(loc.distance(oracle::gamma0(kEll, x, 1.234), x) < 1e-6);
  CHECK(std::abs(fibre_distance(oracle::gamma0(kEll, x, 1.234), r.p.fam, x) - loc.distance(oracle::gamma0(kEll, x, 1.234), x)) == 0.0);
  const double d = 1e-3;
  const Vec vn = oracle::v_n(kEll, x, 0.0);
  CHECK(std::abs(loc.distance(oracle::gamma0(kEll, x, 0.0) + d * vn, x) - d * vn.norm()) <= 0.1 * d * vn.norm());
  const double expect = oracle::v_s(kEll, x, 0.0).norm() * 0.01;
  CHECK(std::abs(loc.distance(oracle::gamma0(kEll, x + 0.01, 0.0), x) - expect) <= 0.2 * expect);

  const auto& m = mlt_reduced();
  const FibreLocator ml(m.p.fam);
  // points of the orbit between phase nodes, spike included
  const auto fine = integrate_orbit(m.p.spec, 0.12, m.p.fam.gamma0[4].col(0), m.p.fam.tau.samples(0, 4), 2041);
  double worst = 0;
  for (int s = 0; s < fine.orbit.count(); ++s) worst = std::max(worst, ml.distance(fine.orbit.samples.col(s), 0.12));
  CHECK(worst < 1e-4);
}

TEST_CASE("section equilibria") {
  const auto& r = ellipsoid_reduced();
  const auto eq = section_equilibria(r.model, 0.05);
  REQUIRE(eq.size() == 3);
  const double roots[] = {pi / 6, pi / 2, 5 * pi / 6};
  for (int i = 0; i < 3; ++i) CHECK(std::abs(eq[i].x - roots[i]) <= 1e-6);
  CHECK(eq[0].stability == Stability::stable);
  CHECK(eq[1].stability == Stability::unstable);
  CHECK(eq[2].stability == Stability::stable);
  CHECK(section_equilibria(r.model, 0.0).empty());

  const auto& m = mlt_reduced();
  const auto meq = section_equilibria(m.model, 0.01);
  REQUIRE(meq.size() == 1);
  CHECK(meq[0].stability == Stability::stable);
  const auto traj = integrate_reduced(m.model, 0.105, 0.0, 0.01, 1500.0, 151);
  REQUIRE_FALSE(traj.exited);
  CHECK(std::abs(traj.path.samples(0, 150) - meq[0].x) < 1e-5);
  // both averaged flows point inward at the grid ends, so exit with a constant drift
  CorrectionOrderJ drift;
  drift.order = 1;
  drift.r = Mat::Ones(2, m.p.fam.x_count());
  drift.gamma.assign(static_cast<std::size_t>(m.p.fam.x_count()), Mat::Zero(3, m.p.fam.phi_count));
  const auto out = integrate_reduced(ReducedModel(m.p.fam, {drift}), 0.13, 0.0, 0.01, 5.0, 101);
  CHECK(out.exited);
  // x reaches 0.14 at t = 1; the exit time is the last sample inside
  CHECK(out.exit_time >= 0.95);
  CHECK(out.exit_time <= 1.0);
  CHECK(out.path.samples.row(0).maxCoeff() <= 0.14);
}

TEST_CASE("shadowing scales with eps") {
  const auto& r = ellipsoid_reduced();
  ShadowingSetup s;
  s.x0 = pi / 3;
  s.offset = Eigen::Vector3d(-0.1, -0.3, 0.5).normalized();
  s.c = 2.0;
  const auto reps = shadowing_experiment(r.p.spec, r.p.fam, r.model, {0.04, 0.02, 0.01}, s);
  for (std::size_t i = 0; i < reps.size(); ++i) {
    CHECK_FALSE(reps[i].truncated);
    CHECK(reps[i].horizon == doctest::Approx(2.0 / reps[i].eps));
    CHECK(reps[i].distance_series.samples.minCoeff() >= 0.0);
    if (i > 0) {
      CHECK(reps[i].ratio >= 1.6);
      CHECK(reps[i].ratio <= 2.6);
    }
  }
  const auto serial = shadowing_experiment(r.p.spec, r.p.fam, r.model, {0.04}, s, ExecutionPolicy::serial);
  CHECK(serial[0].sup_fibre_distance == reps[0].sup_fibre_distance);

  const auto& m = mlt_reduced();
  ShadowingSetup ms;
  ms.x0 = 0.11;
  ms.offset = Eigen::Vector3d(1, 1, 0).normalized();
  const auto mreps = shadowing_experiment(m.p.spec, m.p.fam, m.model, {0.02, 0.01, 0.005}, ms);
  for (std::size_t i = 1; i < mreps.size(); ++i) {
    CHECK_FALSE(mreps[i].truncated);
    CHECK(mreps[i].ratio >= 1.6);
    CHECK(mreps[i].ratio <= 2.6);
  }
  CHECK_THROWS_AS((void)shadowing_experiment(r.p.spec, r.p.fam, r.model, {0.0}, s), ConfigError);
}

TEST_CASE("MLT full attractor sits near the averaged equilibrium") {
  const auto& m = mlt_reduced();
  const double eps = 0.01;
  const auto xstar = section_equilibria(m.model, eps).at(0).x;
  const Vec z0 = m.p.fam.gamma0[4].col(0);
  const auto full = integrate_full(m.p.spec, z0, eps, 1500.0, 15001);
  REQUIRE(full.completed);
  CHECK(full.path.samples.cwiseAbs().maxCoeff() < 2.0);
  // mean x over the last 500 time units
  const double mean_x = full.path.samples.row(2).tail(5000).mean();
  CHECK(std::abs(mean_x - xstar) <= 3 * eps);
}
