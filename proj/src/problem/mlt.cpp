#include <cmath>
#include <functional>

#include "slowman/errors.hpp"
#include "slowman/problem.hpp"

namespace slowman {

double MltParams::m_inf(double v) const { return 0.5 * (1.0 + std::tanh((v - c1) / c2)); }
double MltParams::w_inf(double v) const { return 0.5 * (1.0 + std::tanh((v - c3) / c4)); }
double MltParams::tau_w(double v) const { return tau0 / std::cosh((v - c3) / (2.0 * c4)); }

namespace {

double sech2(double s) {
  const double c = std::cosh(s);
  return 1.0 / (c * c);
}

struct MltDerivatives {
  const MltParams& p;

  [[nodiscard]] double dm(double v) const { return sech2((v - p.c1) / p.c2) / (2.0 * p.c2); }
  [[nodiscard]] double ddm(double v) const {
    const double s = (v - p.c1) / p.c2;
    return -sech2(s) * std::tanh(s) / (p.c2 * p.c2);
  }
  [[nodiscard]] double dw(double v) const { return sech2((v - p.c3) / p.c4) / (2.0 * p.c4); }
  [[nodiscard]] double ddw(double v) const {
    const double s = (v - p.c3) / p.c4;
    return -sech2(s) * std::tanh(s) / (p.c4 * p.c4);
  }
  // fast 2x2 block of DF0 in (v, w)
  [[nodiscard]] Eigen::Matrix2d fast_jacobian(double v, double w) const {
    const double u = (v - p.c3) / (2.0 * p.c4);
    Eigen::Matrix2d j;
    j(0, 0) = -p.g_l - p.g_k * w - p.g_ca * (dm(v) * (v - p.v_ca) + p.m_inf(v));
    j(0, 1) = -p.g_k * (v - p.v_k);
    j(1, 0) = (dw(v) * std::cosh(u) + (p.w_inf(v) - w) * std::sinh(u) / (2.0 * p.c4)) / p.tau0;
    j(1, 1) = -std::cosh(u) / p.tau0;
    return j;
  }
};

}  // namespace

ProblemSpec builtin_morris_lecar_terman(double k_param) {
  MltParams p;
  p.k = k_param;
  return builtin_morris_lecar_terman(p);
}

ProblemSpec builtin_morris_lecar_terman(const MltParams& params) {
  const MltParams p = params;

  VectorFieldTerm f0;
  f0.eval = [p](const Vec& z) -> Vec {
    const double v = z[0];
    const double w = z[1];
    Vec out(3);
    out[0] = z[2] - p.g_l * (v - p.v_l) - p.g_k * w * (v - p.v_k) - p.g_ca * p.m_inf(v) * (v - p.v_ca);
    out[1] = (p.w_inf(v) - w) / p.tau_w(v);
    out[2] = 0.0;
    return out;
  };
  f0.jacobian = [p](const Vec& z) -> Mat {
    const MltDerivatives d{p};
    Mat j = Mat::Zero(3, 3);
    j.topLeftCorner<2, 2>() = d.fast_jacobian(z[0], z[1]);
    j(0, 2) = 1.0;
    return j;
  };
  f0.hessian_apply = [p](const Vec& z, const Vec& a, const Vec& b) -> Vec {
    const MltDerivatives d{p};
    const double v = z[0];
    const double w = z[1];
    const double u = (v - p.c3) / (2.0 * p.c4);
    const double h0_vv = -p.g_ca * (d.ddm(v) * (v - p.v_ca) + 2.0 * d.dm(v));
    const double h0_vw = -p.g_k;
    const double h1_vv = (d.ddw(v) * std::cosh(u) + d.dw(v) * std::sinh(u) / p.c4 +
                          (p.w_inf(v) - w) * std::cosh(u) / (4.0 * p.c4 * p.c4)) /
                         p.tau0;
    const double h1_vw = -std::sinh(u) / (2.0 * p.c4 * p.tau0);
    Vec out = Vec::Zero(3);
    out[0] = h0_vv * a[0] * b[0] + h0_vw * (a[0] * b[1] + a[1] * b[0]);
    out[1] = h1_vv * a[0] * b[0] + h1_vw * (a[0] * b[1] + a[1] * b[0]);
    return out;
  };

  VectorFieldTerm f1;
  f1.eval = [p](const Vec& z) -> Vec {
    Vec out = Vec::Zero(3);
    out[2] = p.k - z[0];
    return out;
  };
  f1.jacobian = [](const Vec&) -> Mat {
    Mat j = Mat::Zero(3, 3);
    j(2, 0) = -1.0;
    return j;
  };
  f1.hessian_apply = [](const Vec&, const Vec&, const Vec&) -> Vec { return Vec::Zero(3); };

  ProblemSpec spec;
  spec.name = "mlt";
  spec.n = 3;
  spec.k = 1;
  spec.terms = {f0, f1};
  spec.params = {{"g_l", p.g_l}, {"g_k", p.g_k}, {"g_ca", p.g_ca}, {"v_l", p.v_l}, {"v_k", p.v_k},
                 {"v_ca", p.v_ca}, {"c1", p.c1},   {"c2", p.c2},     {"c3", p.c3},   {"c4", p.c4},
                 {"tau0", p.tau0}, {"k", p.k}};
  spec.slow_chart = [](const Vec& z) -> Vec { return z.tail<1>(); };
  spec.slow_chart_jacobian = [](const Vec&) -> Mat {
    Mat j = Mat::Zero(1, 3);
    j(0, 2) = 1.0;
    return j;
  };
  return spec;
}

MltParams mlt_params_from(const ProblemSpec& spec) {
  if (spec.name != "mlt") throw ConfigError("not a Morris-Lecar-Terman problem: " + spec.name);
  MltParams p;
  p.g_l = spec.param("g_l");
  p.g_k = spec.param("g_k");
  p.g_ca = spec.param("g_ca");
  p.v_l = spec.param("v_l");
  p.v_k = spec.param("v_k");
  p.v_ca = spec.param("v_ca");
  p.c1 = spec.param("c1");
  p.c2 = spec.param("c2");
  p.c3 = spec.param("c3");
  p.c4 = spec.param("c4");
  p.tau0 = spec.param("tau0");
  p.k = spec.param("k");
  return p;
}

std::vector<CriticalManifoldPoint> mlt_critical_manifold_bifurcations(const MltParams& p, double v_min,
                                                                      double v_max, int samples) {
  const MltDerivatives d{p};
  auto x_of_v = [&](double v) {
    return p.g_l * (v - p.v_l) + p.g_k * p.w_inf(v) * (v - p.v_k) + p.g_ca * p.m_inf(v) * (v - p.v_ca);
  };
  auto trace = [&](double v) { return d.fast_jacobian(v, p.w_inf(v)).trace(); };
  auto det = [&](double v) { return d.fast_jacobian(v, p.w_inf(v)).determinant(); };
  auto bisect = [](const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = f(mid);
      if ((fm > 0.0) == (flo > 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };

  std::vector<CriticalManifoldPoint> out;
  const double dv = (v_max - v_min) / samples;
  for (int i = 0; i < samples; ++i) {
    const double a = v_min + i * dv;
    const double b = a + dv;
    if ((trace(a) > 0.0) != (trace(b) > 0.0)) {
      const double v = bisect(trace, a, b);
      if (det(v) > 0.0) out.push_back({x_of_v(v), v, CriticalManifoldPoint::Kind::hopf});
    }
    // folds of the critical manifold coincide with det = 0
    if ((det(a) > 0.0) != (det(b) > 0.0)) {
      const double v = bisect(det, a, b);
      out.push_back({x_of_v(v), v, CriticalManifoldPoint::Kind::fold});
    }
  }
  return out;
}

}  // namespace slowman
