#include <doctest.h>

#include <cmath>
#include <numbers>

#include "slowman/errors.hpp"
#include "slowman/floquet.hpp"
#include "slowman/numerics/linalg.hpp"
#include "slowman/numerics/stencil.hpp"
#include "slowman/oracle/ellipsoid_oracle.hpp"

#include "fixtures.hpp"

using namespace slowman;
using std::numbers::pi;

using fixtures::ellipsoid_family;
using fixtures::kEll;
using fixtures::mlt_family;

TEST_CASE("finite-difference weights") {
  const auto w = fd_weights({-1, 0, 1}, 0.0, 1);
  CHECK(w[0] == doctest::Approx(-0.5));
  CHECK(std::abs(w[1]) < 1e-15);
  CHECK(w[2] == doctest::Approx(0.5));
  const auto w2 = fd_weights({-1, 0, 1}, 0.0, 2);
  CHECK(w2[0] == doctest::Approx(1.0));
  CHECK(w2[1] == doctest::Approx(-2.0));

  // exact on degree-6 polynomials, including the shifted end stencils
  const UniformGrid1D g(-1.0, 2.0, 12);
  Mat s(1, 12), ref(1, 12);
  for (int i = 0; i < 12; ++i) {
    const double x = g.value(i);
    s(0, i) = std::pow(x, 6) - 3 * std::pow(x, 4) + x;
    ref(0, i) = 6 * std::pow(x, 5) - 12 * std::pow(x, 3) + 1;
  }
  CHECK((stencil_node_derivatives(g, s) - ref).cwiseAbs().maxCoeff() < 1e-9);

  // sixth-order convergence on a smooth function
  double prev = 0.0;
  for (int count : {20, 40, 80}) {
    const UniformGrid1D gg(0.0, 2.0, count);
    Mat v(1, count), d(1, count);
    for (int i = 0; i < count; ++i) {
      v(0, i) = std::sin(2 * gg.value(i));
      d(0, i) = 2 * std::cos(2 * gg.value(i));
    }
    const double err = (stencil_node_derivatives(gg, v) - d).cwiseAbs().maxCoeff();
    if (prev > 0.0) CHECK(prev / err > 40.0);
    prev = err;
  }
  CHECK_THROWS_AS((void)stencil_node_derivatives(UniformGrid1D(0, 1, 5), Mat::Zero(1, 5)), InvalidGrid);
}

TEST_CASE("exponent classification") {
  SUBCASE("diagonal monodromy") {
    const Mat m = Eigen::Vector3d(1.0, 1.0, 0.5).asDiagonal();
    const Mat b = principal_matrix_log(m) / (2 * pi);
    const auto c = classify_exponents(m, b, 2 * pi, 1);
    REQUIRE(c.mu.size() == 3);
    CHECK(std::abs(c.mu[0]) < 1e-15);
    CHECK(std::abs(c.mu[1]) < 1e-15);
    CHECK(c.mu[2].real() == doctest::Approx(std::log(0.5) / (2 * pi)));
    CHECK(c.trivial == std::vector<int>{0, 1});
    CHECK(c.stable == std::vector<int>{2});
    CHECK(c.unstable.empty());
    CHECK(c.lambda == doctest::Approx(-std::log(0.5) / (2 * pi)));
    CHECK(std::abs(c.rho[2] - 0.5) < 1e-14);
  }
  SUBCASE("a nontrivial multiplier inside the cluster") {
    const Mat m = Eigen::Vector3d(1.0, 1.0, 1.0 - 1e-7).asDiagonal();
    const Mat b = principal_matrix_log(m);
    CHECK_THROWS_AS((void)classify_exponents(m, b, 1.0, 1), HyperbolicityViolation);
  }
  SUBCASE("too few trivial multipliers") {
    const Mat m = Eigen::Vector3d(1.0, 0.9, 0.5).asDiagonal();
    CHECK_THROWS_AS((void)classify_exponents(m, principal_matrix_log(m), 1.0, 1), HyperbolicityViolation);
  }
  SUBCASE("ellipsoid next to the equator") {
    // the layer field is singular on the equator itself; mu -> -2 there
    const auto fam = ellipsoid_family(UniformGrid1D(0.47 * pi, 0.49 * pi, 3), 128);
    for (int i = 0; i < 3; ++i) {
      const double x = fam.x_grid.value(i);
      const Mat b = principal_matrix_log(fam.monodromy(i)) / fam.tau.samples(0, i);
      const auto c = classify_exponents(fam.monodromy(i), b, fam.tau.samples(0, i), 1);
      CHECK(std::abs(c.mu[0]) < 1e-9);
      CHECK(std::abs(c.mu[1]) < 1e-9);
      CHECK(std::abs(c.mu[2] - oracle::mu(x)) < 1e-8);
      CHECK(c.lambda == doctest::Approx(1 + std::sin(x)).epsilon(1e-9));
      CHECK(c.trivial.size() == 2);
    }
  }
}

TEST_CASE("ellipsoid frames against the closed forms") {
  const auto spec = builtin_bent_ellipsoid(kEll.a, kEll.rho);
  const auto fam = ellipsoid_family(UniformGrid1D(0.1 * pi, 0.9 * pi, 32), 128);
  const auto frames = compute_frames(spec, fam);
  REQUIRE(frames.size() == 32);
  const auto phis = fam.phi_grid().values();
  for (const auto& f : frames) {
    CHECK(std::abs(f.omega_prime) < 1e-9);
    const Mat w0 = f.basis(0);
    Mat diag = Mat::Zero(3, 3);
    diag(2, 2) = oracle::mu(f.x);
    CHECK((w0.inverse() * f.b * w0 - diag).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((f.c - diag).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(f.exponents.mu[2].real() == doctest::Approx(oracle::mu(f.x)).epsilon(1e-10));
    for (int p = 0; p < f.phi_count(); p += 7) {
      CHECK((f.vR.col(p) - oracle::v_r(kEll, f.x, phis(p))).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((f.vS[0].col(p) - oracle::v_s(kEll, f.x, phis(p))).cwiseAbs().maxCoeff() < 1e-8);
      const Vec vn = oracle::v_n(kEll, f.x, phis(p)).normalized();
      CHECK(1.0 - std::abs(vn.dot(f.vN[0].col(p).normalized())) < 1e-8);
    }
  }
  const auto chk = check_frames(frames, fam);
  CHECK(chk.max_exp_mismatch < 1e-8);
  CHECK(chk.max_vr_transport < 1e-7);
  CHECK(chk.max_tangent_leak < 1e-6);
  CHECK(chk.max_closure < 1e-7);
  CHECK(chk.max_decomposition < 1e-6);
  CHECK(chk.lambda_continuous);
  // orientation carries across the equator
  for (std::size_t i = 1; i < frames.size(); ++i) CHECK(frames[i].vN[0].col(0).dot(frames[i - 1].vN[0].col(0)) > 0);
}

TEST_CASE("spline x-derivatives without the closure constraint") {
  const auto spec = builtin_bent_ellipsoid(kEll.a, kEll.rho);
  const auto fam = ellipsoid_family(UniformGrid1D(0.2 * pi, 0.4 * pi, 16), 64);
  FrameOptions raw;
  raw.x_derivative = XDerivative::cubic_spline;
  raw.enforce_closure = false;
  const auto frames = compute_frames(spec, fam, raw);
  // vS(x,0) is then the plain spline derivative of gamma0(x,0)
  Mat z0(3, 16);
  for (int i = 0; i < 16; ++i) z0.col(i) = fam.gamma0[static_cast<std::size_t>(i)].col(0);
  const Mat d = x_derivatives(fam.x_grid, z0, XDerivative::cubic_spline);
  for (int i = 0; i < 16; ++i) CHECK((frames[static_cast<std::size_t>(i)].vS[0].col(0) - d.col(i)).norm() == 0.0);
  CHECK(frames[0].reduced_accuracy);
  CHECK(!frames[8].reduced_accuracy);
}

TEST_CASE("MLT frames") {
  const auto spec = builtin_morris_lecar_terman(-0.12);
  const auto& fam = mlt_family();
  const auto frames = compute_frames(spec, fam);
  // independent omega'(0.12) by central differences of separately shot periods
  double omega_fd = 0.0;
  {
    const int mid = 4;
    REQUIRE(fam.x_grid.value(mid) == doctest::Approx(0.12));
    ShootingOptions o;
    o.phi_count = 256;
    o.bvp_tol = 1e-12;
    const double h = 1e-4;
    double om[2];
    for (int s = 0; s < 2; ++s) {
      const double x = 0.12 + (s == 0 ? h : -h);
      Vec z0 = fam.gamma0[mid].col(0);
      z0(2) = x;
      const auto r = shoot_periodic_orbit(spec, x, {z0, fam.tau.samples(0, mid)}, SampledCurve(UniformGrid1D(0, 1, 256), fam.gamma0[mid]), o);
      om[s] = 2 * pi / r.period;
    }
    omega_fd = (om[0] - om[1]) / (2 * h);
  }
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    CHECK(std::abs(f.exponents.mu[0]) < 1e-6);
    CHECK(std::abs(f.exponents.mu[1]) < 1e-6);
    CHECK(f.exponents.mu[2].real() < 0.0);
    CHECK(std::abs(f.exponents.mu[2].imag()) == 0.0);
    if (i == 4) CHECK(f.omega_prime == doctest::Approx(omega_fd).epsilon(1e-6));
    Mat expect = Mat::Zero(3, 3);
    expect(0, 1) = f.omega_prime / f.omega;
    expect(2, 2) = f.exponents.mu[2].real();
    CHECK((f.c - expect).cwiseAbs().maxCoeff() < 1e-6);
    const int last = f.phi_count() - 1;
    CHECK((f.vS[0].col(0) - f.vS[0].col(last)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((f.vN[0].col(0) - f.vN[0].col(last)).cwiseAbs().maxCoeff() < 1e-7);
    // the slow direction is the only one moving z3
    CHECK(std::abs(f.vS[0](2, 0) - 1.0) < 1e-10);
    CHECK(std::abs(f.vR(2, 0)) < 1e-14);
  }
  const auto chk = check_frames(frames, fam);
  CHECK(chk.max_exp_mismatch < 1e-8);
  CHECK(chk.max_vr_transport < 1e-7);
  CHECK(chk.max_tangent_leak < 1e-6);
  CHECK(chk.max_decomposition < 1e-6);
  CHECK(chk.lambda_continuous);

  const auto serial = compute_frames(spec, fam, {}, ExecutionPolicy::serial);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    CHECK(serial[i].vS[0] == frames[i].vS[0]);
    CHECK(serial[i].vN[0] == frames[i].vN[0]);
    CHECK(serial[i].c == frames[i].c);
  }
}
