#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "slowman/errors.hpp"
#include "slowman/oracle/ellipsoid_oracle.hpp"
#include "slowman/orbit_family.hpp"

using namespace slowman;
using std::numbers::pi;

namespace {

const oracle::EllipsoidParams kEll{};

OrbitFamily ellipsoid_family(int x_count, int phi_count, ExecutionPolicy policy = ExecutionPolicy::parallel) {
  const auto spec = builtin_bent_ellipsoid(kEll.a, kEll.rho);
  return family_from_closed_form(
      spec, [](double x, double phi) -> Vec { return oracle::gamma0(kEll, x, phi); },
      [](double) { return 2 * pi; }, UniformGrid1D(0.1 * pi, 0.9 * pi, x_count), phi_count, policy);
}

ShootResult mlt_seed(const ProblemSpec& spec, int phi_count = 256) {
  const Vec start = Eigen::Vector3d(0.3, 0.0, 0.12);
  const OrbitGuess g = guess_from_simulation(spec, start, 200.0, 100.0);
  ShootingOptions o;
  o.phi_count = phi_count;
  return shoot_periodic_orbit(spec, 0.12, g, std::nullopt, o);
}

}  // namespace

TEST_CASE("closed-form ellipsoid family") {
  const auto fam = ellipsoid_family(8, 128);
  const auto spec = builtin_bent_ellipsoid(kEll.a, kEll.rho);
  CHECK(fam.x_count() == 8);
  for (int i = 0; i < fam.x_count(); ++i) {
    CHECK(fam.tau.samples(0, i) == 2 * pi);
    CHECK(fam.omega.samples(0, i) == 1.0);
    CHECK(fam.transition[i][0] == Mat::Identity(3, 3));
  }
  const auto chk = check_family(spec, fam);
  CHECK(chk.ok(FamilyTolerances{}));
  CHECK(chk.min_det_transition > 0);
  // multipliers {1, 1, exp(2 pi mu)}
  for (int i = 0; i < fam.x_count(); ++i) {
    const auto m = floquet_multipliers(fam.monodromy(i));
    CHECK(std::abs(m[0] - 1.0) < 1e-8);
    CHECK(std::abs(m[1] - 1.0) < 1e-8);
    CHECK(std::abs(m[2] - std::exp(2 * pi * oracle::mu(fam.x_grid.value(i)))) < 1e-10);
  }
  CHECK(detect_family_boundaries(fam).empty());
}

TEST_CASE("closed-form family rejects an embedding that is not an orbit") {
  const auto spec = builtin_bent_ellipsoid(kEll.a, kEll.rho);
  auto wrong = [](double x, double phi) -> Vec { return oracle::gamma0(kEll, x, 2 * phi); };
  CHECK_THROWS_AS((void)family_from_closed_form(spec, wrong, [](double) { return 2 * pi; },
                                                UniformGrid1D(0.2 * pi, 0.4 * pi, 4), 64),
                  InconsistentEmbedding);
}

TEST_CASE("serial and parallel closed-form families are bitwise equal") {
  const auto a = ellipsoid_family(6, 64, ExecutionPolicy::serial);
  const auto b = ellipsoid_family(6, 64, ExecutionPolicy::parallel);
  for (int i = 0; i < 6; ++i) {
    CHECK(a.gamma0[i] == b.gamma0[i]);
    for (int p = 0; p < 64; ++p) CHECK(a.transition[i][p] == b.transition[i][p]);
  }
}

TEST_CASE("continuation reproduces the closed-form ellipsoid family") {
  // the layer field is singular on the equator, so each hemisphere is its own branch
  const auto spec = builtin_bent_ellipsoid(kEll.a, kEll.rho);
  const UniformGrid1D xg(0.1 * pi, 0.45 * pi, 6);
  const int pc = 128;
  ContinuationOptions co;
  co.shooting.phi_count = pc;
  co.max_step = 0.2;
  const double x0 = 0.3 * pi;
  const ShootResult seed = shoot_periodic_orbit(spec, x0, {oracle::gamma0(kEll, x0, 0.0), 2 * pi}, std::nullopt,
                                                co.shooting);
  const OrbitFamily cont = continue_family(spec, seed, xg, co);
  const OrbitFamily ref = family_from_closed_form(
      spec, [](double x, double phi) -> Vec { return oracle::gamma0(kEll, x, phi); }, [](double) { return 2 * pi; },
      xg, pc);
  for (int i = 0; i < xg.count(); ++i) {
    CHECK((cont.gamma0[i] - ref.gamma0[i]).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(std::abs(cont.tau.samples(0, i) - 2 * pi) < 1e-8);
    CHECK((cont.monodromy(i) - ref.monodromy(i)).cwiseAbs().maxCoeff() < 1e-8);
  }

  ContinuationOptions across = co;
  across.min_step = 1e-4;
  CHECK_THROWS_AS((void)continue_family(spec, seed, UniformGrid1D(0.3 * pi, 0.6 * pi, 4), across), ContinuationStall);
}

TEST_CASE("MLT orbit at x = 0.12") {
  const auto spec = builtin_morris_lecar_terman(-0.12);
  const ShootResult r = mlt_seed(spec);
  CHECK(r.residual <= 1e-10);
  CHECK(r.orbit.closure_error() <= 1e-10);
  const auto m = floquet_multipliers(r.phi.back());
  CHECK(std::abs(m[0] - 1.0) < 1e-6);
  CHECK(std::abs(m[1] - 1.0) < 1e-6);
  CHECK(std::abs(m[2]) < 1.0);
  CHECK(std::abs(m[2].imag()) < 1e-12);
  for (const auto& phi : r.phi) CHECK((phi.row(2) - Eigen::RowVector3d(0, 0, 1)).cwiseAbs().maxCoeff() <= 1e-10);
  for (int i = 0; i < r.orbit.count(); ++i) CHECK(r.orbit.samples(2, i) == doctest::Approx(0.12).epsilon(1e-14));

  // converged orbit is a fixed point of Newton
  const ShootResult again = shoot_periodic_orbit(spec, 0.12, {r.orbit.samples.col(0), r.period}, r.orbit);
  CHECK((again.orbit.samples - r.orbit.samples).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(std::abs(again.period - r.period) <= 1e-12);
}

TEST_CASE("shooting failures") {
  const auto spec = builtin_morris_lecar_terman(-0.12);
  ShootingOptions o;
  o.phi_count = 64;
  o.max_iter = 2;
  // far from any orbit: Newton cannot converge in two steps
  const Vec start = Eigen::Vector3d(0.6, 0.4, 0.12);
  try {
    (void)shoot_periodic_orbit(spec, 0.12, {start, 5.0}, std::nullopt, o);
    FAIL("expected a failure");
  } catch (const ConvergenceError& e) {
    CHECK(e.last_residual() > 1e-10);
  } catch (const DegenerateOrbit&) {
  }
  CHECK_THROWS_AS((void)shoot_periodic_orbit(spec, 0.12, {start, 1e-4}, std::nullopt, o), DegenerateOrbit);
}

TEST_CASE("MLT family over U and its invariants") {
  const auto spec = builtin_morris_lecar_terman(-0.12);
  const ShootResult seed = mlt_seed(spec, 128);
  ContinuationOptions co;
  co.shooting.phi_count = 128;
  const OrbitFamily fam = continue_family(spec, seed, UniformGrid1D(0.077, 0.142, 9), co);
  for (int i = 0; i < fam.x_count(); ++i) {
    const auto m = floquet_multipliers(fam.monodromy(i));
    int trivial = 0;
    for (auto v : m) trivial += std::abs(v - 1.0) < 1e-6;
    CHECK(trivial == 2);
    CHECK(fam.gamma0[i].col(0)(2) == doctest::Approx(fam.x_grid.value(i)).epsilon(1e-14));
  }
  const auto chk = check_family(spec, fam);
  CHECK(chk.max_closure <= 1e-9);
  CHECK(chk.min_det_transition > 0);
  CHECK(chk.identity_at_zero);
  // omega decreases toward the SNIC end
  CHECK(fam.omega.samples(0, 0) < fam.omega.samples(0, 8));

  std::stringstream ss;
  write_family(ss, fam);
  const OrbitFamily back = read_family(ss);
  CHECK(back.x_grid == fam.x_grid);
  for (int i = 0; i < fam.x_count(); ++i) {
    CHECK(back.gamma0[i] == fam.gamma0[i]);
    CHECK(back.monodromy(i) == fam.monodromy(i));
    CHECK(back.tau.samples(0, i) == fam.tau.samples(0, i));
  }
  std::string text = ss.str();
  text[text.size() - 5] = text[text.size() - 5] == '1' ? '2' : '1';
  std::istringstream corrupted(text);
  CHECK_THROWS_AS((void)read_family(corrupted), ConfigError);
}

TEST_CASE("MLT branch boundaries") {
  const auto spec = builtin_morris_lecar_terman(-0.12);
  const ShootResult seed = mlt_seed(spec, 128);
  ContinuationOptions co;
  co.shooting.phi_count = 128;
  const auto up = trace_branch(spec, seed, 0.16, co);
  CHECK(up.stalled);
  const auto snpo = detect_family_boundaries(up);
  REQUIRE(snpo.size() == 1);
  CHECK(snpo[0].kind == BoundaryKind::snpo);
  CHECK(std::abs(snpo[0].x - 0.1493) < 1e-3);

  const auto down = trace_branch(spec, seed, 0.07, co);
  const auto snic = detect_family_boundaries(down);
  REQUIRE(snic.size() == 1);
  CHECK(snic[0].kind == BoundaryKind::snic);
  CHECK(std::abs(snic[0].x - 0.07544) < 5e-3);
}
