#include <algorithm>
#include <cmath>
#include <sstream>

#include "slowman/errors.hpp"
#include "slowman/problem.hpp"

namespace slowman {

namespace {

// q = z3 + rho z1^2 is the height coordinate of the bent ellipsoid; the layer
// field is singular where q = 0 off the manifold and not smooth at |q| = a.
struct EllipsoidGeometry {
  double a;
  double rho;

  [[nodiscard]] double q(const Vec& z) const { return z[2] + rho * z[0] * z[0]; }
  [[nodiscard]] double g(const Vec& z) const {
    const double qq = q(z);
    return z[0] * z[0] + z[1] * z[1] + qq * qq - a * a;
  }

  void guard(double qq) const {
    if (std::abs(qq) >= a * (1.0 - 1e-12) || qq == 0.0 || !std::isfinite(qq)) {
      std::ostringstream os;
      os << "bent ellipsoid: |z3 + rho z1^2| = " << std::abs(qq) << " outside (0, " << a << ")";
      throw DomainError(os.str());
    }
  }

  // N(q) and its first two q-derivatives (third component of N0 only).
  [[nodiscard]] double n0(double qq) const {
    const double s = std::sqrt(a * a - qq * qq);
    return -0.5 * a * (a + s) / qq;
  }
  [[nodiscard]] double n1(double qq) const {
    const double s = std::sqrt(a * a - qq * qq);
    return 0.5 * a * (1.0 / s + (a + s) / (qq * qq));
  }
  [[nodiscard]] double n2(double qq) const {
    const double s = std::sqrt(a * a - qq * qq);
    return 0.5 * a * (qq / (s * s * s) - 1.0 / (qq * s) - 2.0 * (a + s) / (qq * qq * qq));
  }
  [[nodiscard]] Eigen::Vector3d grad_q(const Vec& z) const { return {2.0 * rho * z[0], 0.0, 1.0}; }
  [[nodiscard]] Eigen::Vector3d grad_g(const Vec& z) const {
    const double qq = q(z);
    return {2.0 * z[0] + 4.0 * rho * qq * z[0], 2.0 * z[1], 2.0 * qq};
  }
};

}  // namespace

ProblemSpec builtin_bent_ellipsoid(double a, double rho) {
  if (!(a > 0.0)) throw ConfigError("bent ellipsoid needs a > 0");
  const EllipsoidGeometry geo{a, rho};

  VectorFieldTerm f0;
  f0.eval = [geo](const Vec& z) -> Vec {
    const double qq = geo.q(z);
    geo.guard(qq);
    Vec out(3);
    out << -z[1], z[0], 2.0 * geo.rho * z[0] * z[1] + geo.n0(qq) * geo.g(z);
    return out;
  };
  f0.jacobian = [geo](const Vec& z) -> Mat {
    const double qq = geo.q(z);
    geo.guard(qq);
    Mat j = Mat::Zero(3, 3);
    j(0, 1) = -1.0;
    j(1, 0) = 1.0;
    const Eigen::Vector3d row = Eigen::Vector3d(2.0 * geo.rho * z[1], 2.0 * geo.rho * z[0], 0.0) +
                                geo.n1(qq) * geo.g(z) * geo.grad_q(z) + geo.n0(qq) * geo.grad_g(z);
    j.row(2) = row.transpose();
    return j;
  };
  f0.hessian_apply = [geo](const Vec& z, const Vec& u, const Vec& v) -> Vec {
    const double qq = geo.q(z);
    geo.guard(qq);
    const Eigen::Vector3d gq = geo.grad_q(z);
    const Eigen::Vector3d gg = geo.grad_g(z);
    Eigen::Matrix3d hq = Eigen::Matrix3d::Zero();
    hq(0, 0) = 2.0 * geo.rho;
    Eigen::Matrix3d hg = Eigen::Matrix3d::Zero();
    hg(0, 0) = 2.0;
    hg(1, 1) = 2.0;
    hg += 2.0 * gq * gq.transpose() + 2.0 * qq * hq;
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    h(0, 1) = h(1, 0) = 2.0 * geo.rho;
    const double g = geo.g(z);
    h += geo.n2(qq) * g * gq * gq.transpose() + geo.n1(qq) * (gq * gg.transpose() + gg * gq.transpose()) +
         geo.n1(qq) * g * hq + geo.n0(qq) * hg;
    Vec out = Vec::Zero(3);
    out[2] = u.head<3>().dot(h * v.head<3>());
    return out;
  };

  VectorFieldTerm f1;
  f1.eval = [geo](const Vec& z) -> Vec {
    const double qq = geo.q(z);
    geo.guard(qq);
    Vec out = Vec::Zero(3);
    out[1] = qq * qq * (geo.a * geo.a / 16.0 * z[1] - z[0] * z[0] * z[1]) / (geo.a * geo.a);
    return out;
  };
  f1.jacobian = [geo](const Vec& z) -> Mat {
    const double qq = geo.q(z);
    geo.guard(qq);
    const double a2 = geo.a * geo.a;
    const double p = (a2 / 16.0 - z[0] * z[0]) * z[1];
    Mat j = Mat::Zero(3, 3);
    j(1, 0) = (2.0 * qq * 2.0 * geo.rho * z[0] * p + qq * qq * (-2.0 * z[0] * z[1])) / a2;
    j(1, 1) = qq * qq * (a2 / 16.0 - z[0] * z[0]) / a2;
    j(1, 2) = 2.0 * qq * p / a2;
    return j;
  };

  ProblemSpec spec;
  spec.name = "ellipsoid";
  spec.n = 3;
  spec.k = 1;
  spec.terms = {f0, f1};
  spec.params = {{"a", a}, {"rho", rho}};
  // q / a = cos x on the manifold and q is conserved by the layer flow there
  spec.slow_chart = [geo](const Vec& z) -> Vec {
    Vec x(1);
    x[0] = std::acos(std::clamp(geo.q(z) / geo.a, -1.0, 1.0));
    return x;
  };
  spec.slow_chart_jacobian = [geo](const Vec& z) -> Mat {
    const double c = geo.q(z) / geo.a;
    const double factor = -1.0 / (geo.a * std::sqrt(std::max(1e-300, 1.0 - c * c)));
    Mat j(1, 3);
    j.row(0) = factor * geo.grad_q(z).transpose();
    return j;
  };
  return spec;
}

Vec bent_ellipsoid_orbit(double a, double rho, double x, double phi) {
  const double sx = std::sin(x), cx = std::cos(x);
  Vec z(3);
  z << a * sx * std::cos(phi), a * sx * std::sin(phi), a * cx - rho * a * a * sx * sx * std::cos(phi) * std::cos(phi);
  return z;
}

}  // namespace slowman
