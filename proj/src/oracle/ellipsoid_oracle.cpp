#include "slowman/oracle/ellipsoid_oracle.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "slowman/errors.hpp"
#include "slowman/problem.hpp"

namespace slowman::oracle {

namespace {

using std::cos;
using std::sin;
using Cx = std::complex<double>;
using std::numbers::pi;

void check_pole(double x) {
  if (std::abs(std::sin(x)) < 1e-12) throw SingularParametrisation("ellipsoid oracle evaluated at a pole");
}

void check_equator(double x) {
  check_pole(x);
  if (std::abs(std::cos(x)) < 1e-12)
    throw SingularParametrisation("ellipsoid normal basis is parallel to v_S at x = pi/2");
}

void require_unit_a(const EllipsoidParams& p) {
  if (p.a != 1.0)
    throw UnsupportedConfiguration("ellipsoid closed forms for the corrections hold for a = 1 only");
}

// Printed formulas, templated on the phase type so d/dphi can be taken by complex step.
template <class T>
Eigen::Matrix<T, 3, 1> gamma0_t(const EllipsoidParams& p, double x, T phi) {
  const double a = p.a, sx = sin(x), cx = cos(x);
  Eigen::Matrix<T, 3, 1> z;
  z << a * sx * cos(phi), a * sx * sin(phi), a * cx - p.rho * a * a * sx * sx * cos(phi) * cos(phi);
  return z;
}

template <class T>
Eigen::Matrix<T, 3, 1> gamma1n_t(const EllipsoidParams& p, double x, T phi, bool as_printed = false) {
  const double a = p.a, sx = sin(x), c2x = cos(2 * x), m = mu(x);
  const T s2p = sin(2.0 * phi), s4p = sin(4.0 * phi), c2p = cos(2.0 * phi), c4p = cos(4.0 * phi), sp = sin(phi);
  const double h0 = -32 + 64 * c2x;
  const T h1 = 16.0 * (s2p - 2 * sx * sx * s4p);
  const T h2 = -10 + 20 * c2x - 8.0 * c2p + 4.0 * c4p - 4 * c2x * c4p;
  const T h3 = s2p - 8 * sx * sx * s4p;
  const T h4 = sp * sp - 4 * sx * sx * s2p * s2p;
  double pre = a * a * a * sx * sx / (8 * m * (4 + m * m) * (16 + m * m));
  // The printed prefactor misses -cos(x)/2: with it, Gamma1N = Pi_N Gamma1 and
  // Gamma1M + Gamma1N = Gamma1 hold identically.
  if (!as_printed) pre *= -0.5 * cos(x);
  Eigen::Matrix<T, 3, 1> g;
  g << T(0), T(0), pre * (h0 + h1 * m + h2 * (m * m) + h3 * (m * m * m) + h4 * (m * m * m * m));
  return g;
}

template <class T>
Eigen::Matrix<T, 3, 1> gamma1_t(const EllipsoidParams& p, double x, T phi) {
  const double a = p.a, sx = sin(x), cx = cos(x), c2x = cos(2 * x), s2x = sin(2 * x), m = mu(x);
  const T sp = sin(phi), cp = cos(phi), s2p = sin(2.0 * phi), c2p = cos(2.0 * phi), s4p = sin(4.0 * phi),
          c4p = cos(4.0 * phi);
  const T l1 = 0.5 * s2p * (1.0 + p.rho * a * cx * (c2x + 4 * sx * sx * c2p));
  const T l2 = 2.0 * sp * (2.0 * cp + m * sp);
  const T l3 = m * sx * sx * (4.0 * c4p - 4.0 + m * s4p);
  const double l4 = 4 * (16 + 7 * m * m - 8 * c2x * (4 + m * m));
  const double pre = a * a * a * sx / 64;
  Eigen::Matrix<T, 3, 1> g;
  g << pre * (-cx * cx * (c2x + 4 * sx * sx * c2p) * sp),
      pre * (cx * cx * cp * (4 - 5 * c2x - 24 * sx * sx * sp * sp)),
      pre * s2x * (l1 - l2 / (4 + m * m) - l3 / (16 + m * m) + l4 / (m * (4 + m * m) * (16 + m * m)));
  return g;
}

template <class F>
Vec3 phase_derivative(F&& f, double phi) {
  const double h = 1e-30;
  const Eigen::Matrix<Cx, 3, 1> v = f(Cx(phi, h));
  return v.imag() / h;
}

}  // namespace

double mu(double x) { return -(1.0 + std::sin(x)); }

Vec3 gamma0(const EllipsoidParams& p, double x, double phi) {
  check_pole(x);
  return gamma0_t<double>(p, x, phi);
}

Vec3 v_r(const EllipsoidParams& p, double x, double phi) {
  check_pole(x);
  const double a = p.a, sx = sin(x);
  return {-a * sx * sin(phi), a * sx * cos(phi), p.rho * a * a * sx * sx * sin(2 * phi)};
}

Vec3 v_s(const EllipsoidParams& p, double x, double phi) {
  check_pole(x);
  const double a = p.a, sx = sin(x), cx = cos(x);
  return {a * cx * cos(phi), a * cx * sin(phi), -a * sx - p.rho * a * a * sin(2 * x) * cos(phi) * cos(phi)};
}

Vec3 v_n(const EllipsoidParams& p, double x, double) {
  check_equator(x);
  return {0.0, 0.0, 0.5 * p.a * mu(x) / cos(x)};
}

Mat3 floquet_b(const EllipsoidParams& p, double x) {
  require_unit_a(p);
  check_pole(x);
  Mat3 b = Mat3::Zero();
  b(2, 2) = mu(x);
  return b;
}

Projectors projectors(const EllipsoidParams& p, double x, double t) {
  check_equator(x);
  const double a = p.a, r = p.rho, sx = sin(x), cx = cos(x), tx = std::tan(x);
  const double st = sin(t), ct = cos(t);
  Projectors out;
  out.r << st * st, -st * ct, 0,  //
      -st * ct, ct * ct, 0,       //
      -2 * a * r * ct * st * st * sx, 2 * a * r * ct * ct * st * sx, 0;
  out.s << ct * ct, st * ct, 0,  //
      st * ct, st * st, 0,       //
      -ct * (1 + 2 * a * r * cx * ct * ct) * tx, -(1 + 2 * a * r * cx * ct * ct) * st * tx, 0;
  out.n << 0, 0, 0,  //
      0, 0, 0,       //
      (2 * a * r * sx + tx) * ct, tx * st, 1;
  return out;
}

Mat3 psi(const EllipsoidParams& p, double x, double t) {
  check_equator(x);
  const double a = p.a, sx = sin(x), cx = cos(x), m = mu(x), st = sin(t), ct = cos(t);
  Mat3 s;
  s << -st / sx, ct / cx, 2 * sx * (1 + 2 * a * p.rho * cx) * ct / m,  //
      ct / sx, st / cx, 2 * sx * st / m,                                 //
      0, 0, 2 * cx / m;
  return s / a;
}

Eigen::Vector2d r1(const EllipsoidParams& p, double x) {
  check_pole(x);
  return {p.a * p.a * (sin(4 * x) - sin(2 * x)) / 64.0, 0.0};
}

Vec3 gamma1_normal(const EllipsoidParams& p, double x, double phi) {
  require_unit_a(p);
  check_pole(x);
  return gamma1n_t<double>(p, x, phi);
}

Vec3 gamma1_normal_as_printed(const EllipsoidParams& p, double x, double phi) {
  require_unit_a(p);
  check_pole(x);
  return gamma1n_t<double>(p, x, phi, true);
}

Vec3 gamma1(const EllipsoidParams& p, double x, double phi) {
  require_unit_a(p);
  check_pole(x);
  return gamma1_t<double>(p, x, phi);
}

Vec3 gamma1_initial(const EllipsoidParams& p, double x) {
  require_unit_a(p);
  check_pole(x);
  const double a = p.a, sx = sin(x), cx = cos(x), c2x = cos(2 * x), m = mu(x);
  return a * a * a * sx * cx *
         Vec3(0.0, cx * (4 - 5 * c2x) / 64.0,
              sx * (16 + 7 * m * m - 8 * c2x * (4 + m * m)) / (8 * m * (4 + m * m) * (16 + m * m)));
}

Vec3 gamma1_tangent(const EllipsoidParams& p, double x, double phi) {
  require_unit_a(p);
  check_pole(x);
  const double a = p.a, sx = sin(x), cx = cos(x), c2x = cos(2 * x), c3x = cos(3 * x);
  const double sp = sin(phi), cp = cos(phi), s2p = sin(2 * phi), c2p = cos(2 * phi);
  return a * a * a * sx * cx / 64.0 *
         Vec3(-cx * sp * (c2x + 4 * sx * sx * c2p), cx * cp * (4 - 5 * c2x - 24 * sx * sx * sp * sp),
              0.5 * sx * s2p * (2 - 8 * sx * sx * c2p + p.rho * a * (cx + c3x + 8 * cx * sx * sx * c2p)));
}

Vec3 homological_residual(const EllipsoidParams& p, double x, double phi) {
  const ProblemSpec spec = builtin_bent_ellipsoid(p.a, p.rho);
  const Vec z = gamma0(p, x, phi);
  const Vec3 g1 = gamma1(p, x, phi);
  const Vec3 dg1 = phase_derivative([&](Cx ph) { return gamma1_t<Cx>(p, x, ph); }, phi);
  const double omega = 1.0;
  const Vec3 tangent = v_s(p, x, phi) * r1(p, x)(0) + v_r(p, x, phi) * r1(p, x)(1) / omega;
  return omega * dg1 - spec.layer().jacobian(z) * g1 + tangent - spec.terms[1].eval(z);
}

Vec3 normal_residual(const EllipsoidParams& p, double x, double phi) {
  const ProblemSpec spec = builtin_bent_ellipsoid(p.a, p.rho);
  const Vec z = gamma0(p, x, phi);
  const Vec3 gn = gamma1_normal(p, x, phi);
  const Vec3 dgn = phase_derivative([&](Cx ph) { return gamma1n_t<Cx>(p, x, ph); }, phi);
  return dgn - spec.layer().jacobian(z) * gn - projectors(p, x, phi).n * spec.terms[1].eval(z);
}

double self_test(const EllipsoidParams& p, int samples, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> ux(0.1 * pi, 0.9 * pi);
  std::uniform_real_distribution<double> up(0.0, 2 * pi);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    double x = ux(rng);
    if (std::abs(x - pi / 2) < 1e-3) x += 2e-3;
    const double phi = up(rng);
    worst = std::max(worst, homological_residual(p, x, phi).lpNorm<Eigen::Infinity>());
    worst = std::max(worst, normal_residual(p, x, phi).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

}  // namespace slowman::oracle
