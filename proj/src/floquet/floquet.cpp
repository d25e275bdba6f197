#include "slowman/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "slowman/errors.hpp"
#include "slowman/numerics/linalg.hpp"
#include "slowman/numerics/spline.hpp"
#include "slowman/numerics/stencil.hpp"

namespace slowman {

namespace {

using Cx = std::complex<double>;

std::string at_x(double x) {
  std::ostringstream os;
  os << " at x = " << x;
  return os.str();
}

// Real unit eigenvector of B for the eigenvalue closest to `mu`.
Vec real_eigenvector(const Mat& b, double mu) {
  Eigen::EigenSolver<Mat> es(b);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()(i) - mu) < std::abs(es.eigenvalues()(best) - mu)) best = i;
  Vec v = es.eigenvectors().col(best).real();
  // a complex eigenvector with a real eigenvalue can carry its phase in the imaginary part
  if (v.norm() < 1e-8) v = es.eigenvectors().col(best).imag();
  return v.normalized();
}

void orient(Vec& v) {
  Eigen::Index i = 0;
  v.cwiseAbs().maxCoeff(&i);
  if (v(i) < 0.0) v = -v;
}

}  // namespace

Mat x_derivatives(const UniformGrid1D& grid, const Mat& samples, XDerivative method) {
  if (method == XDerivative::cubic_spline || grid.count() < 7)
    return CubicSpline(grid, samples, SplineEnd::not_a_knot).node_derivatives();
  return stencil_node_derivatives(grid, samples, 7);
}

ExponentClassification classify_exponents(const Mat& monodromy, const Mat& b, double period, int k,
                                          double cluster_tol) {
  (void)monodromy;
  const Eigen::EigenSolver<Mat> es(b, false);
  const auto n = static_cast<int>(b.rows());
  std::vector<Cx> mu(es.eigenvalues().data(), es.eigenvalues().data() + n);
  std::vector<Cx> rho(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) rho[static_cast<std::size_t>(i)] = std::exp(mu[static_cast<std::size_t>(i)] * period);

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int c) {
    return std::abs(rho[static_cast<std::size_t>(a)] - 1.0) < std::abs(rho[static_cast<std::size_t>(c)] - 1.0);
  });
  int cluster = 0;
  for (int i : order) cluster += std::abs(rho[static_cast<std::size_t>(i)] - 1.0) < cluster_tol;
  if (cluster != k + 1) {
    std::ostringstream os;
    os << "found " << cluster << " Floquet multipliers within " << cluster_tol << " of 1, expected " << k + 1;
    throw HyperbolicityViolation(os.str());
  }
  // trivial exponents first, the rest by real part
  std::sort(order.begin() + k + 1, order.end(), [&](int a, int c) {
    return mu[static_cast<std::size_t>(a)].real() < mu[static_cast<std::size_t>(c)].real();
  });

  ExponentClassification out;
  out.lambda = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    const auto src = static_cast<std::size_t>(order[static_cast<std::size_t>(j)]);
    out.mu.push_back(mu[src]);
    out.rho.push_back(rho[src]);
    if (j <= k) {
      out.trivial.push_back(j);
      continue;
    }
    (mu[src].real() < 0.0 ? out.stable : out.unstable).push_back(j);
    out.lambda = std::min(out.lambda, std::abs(mu[src].real()));
  }
  return out;
}

Mat FloquetFrame::basis(int p) const {
  Mat w(n(), 1 + static_cast<int>(vS.size() + vN.size()));
  int col = 0;
  w.col(col++) = vR.col(p);
  for (const auto& v : vS) w.col(col++) = v.col(p);
  for (const auto& v : vN) w.col(col++) = v.col(p);
  return w;
}

std::vector<FloquetFrame> compute_frames(const ProblemSpec& spec, const OrbitFamily& family,
                                         const FrameOptions& options, ExecutionPolicy policy) {
  if (family.k != 1) throw UnsupportedConfiguration("tangent bases need a one-parameter family (k = 1)");
  const int nx = family.x_count();
  const int n = family.n;
  const int np = family.phi_count;

  // x-derivatives need the whole family, so they are taken up front
  Mat z0(n, nx);
  for (int i = 0; i < nx; ++i) z0.col(i) = family.gamma0[static_cast<std::size_t>(i)].col(0);
  const Mat dz0 = x_derivatives(family.x_grid, z0, options.x_derivative);
  const Mat domega = x_derivatives(family.x_grid, family.omega.samples, options.x_derivative);
  const Eigen::VectorXd phis = family.phi_grid().values();

  std::vector<FloquetFrame> frames(static_cast<std::size_t>(nx));
  for_each_slice(static_cast<std::size_t>(nx), policy, [&](std::size_t i) {
    const int xi = static_cast<int>(i);
    const auto& phi_t = family.transition[i];
    const Mat& gam = family.gamma0[i];
    FloquetFrame f;
    f.x = family.x_grid.value(xi);
    f.period = family.tau.samples(0, xi);
    f.omega = family.omega.samples(0, xi);
    f.omega_prime = domega(0, xi);
    f.reduced_accuracy = xi < 3 || xi > nx - 4;
    f.monodromy = family.monodromy(xi);
    try {
      f.b = principal_matrix_log(f.monodromy) / f.period;
    } catch (const BranchFailure& e) {
      throw BranchFailure(std::string(e.what()) + at_x(f.x));
    }
    try {
      f.exponents = classify_exponents(f.monodromy, f.b, f.period, family.k, options.cluster_tol);
    } catch (const HyperbolicityViolation& e) {
      throw HyperbolicityViolation(std::string(e.what()) + at_x(f.x));
    }

    f.vR.resize(n, np);
    for (int p = 0; p < np; ++p) f.vR.col(p) = spec.layer().eval(gam.col(p));
    Vec vs0 = dz0.col(xi);
    if (options.enforce_closure) {
      // (v, omega') solving (M - I) v = T (omega'/omega) vR(0) and chart' v = 1 fixes omega'
      // exactly and v up to a multiple of vR(0); take the solution nearest the x-derivative
      const Mat chart = spec.slow_chart_jacobian(gam.col(0));
      const auto kc = chart.rows();
      Mat a = Mat::Zero(n + kc, n + 1);
      a.topLeftCorner(n, n) = f.monodromy - Mat::Identity(n, n);
      a.topRightCorner(n, 1) = -(f.period / f.omega) * f.vR.col(0);
      a.bottomLeftCorner(kc, n) = chart;
      Vec rhs = Vec::Zero(n + kc);
      rhs.tail(kc).setOnes();
      Vec guess(n + 1);
      guess << vs0, f.omega_prime;
      guess += solve_least_squares(a, rhs - a * guess).solution;
      vs0 = guess.head(n);
      f.omega_prime = guess(n);
    }
    const double drift = f.omega_prime / f.omega;
    Mat vs(n, np);
    for (int p = 0; p < np; ++p) {
      const double t = phis(p) / f.omega;
      vs.col(p) = phi_t[static_cast<std::size_t>(p)] * vs0 - t * drift * f.vR.col(p);
    }
    f.vS.push_back(std::move(vs));

    for (std::size_t j = family.k + 1; j < f.exponents.mu.size(); ++j) {
      const Cx mu = f.exponents.mu[j];
      if (std::abs(mu.imag()) > 1e-10 * std::max(1.0, std::abs(mu)))
        throw UnsupportedConfiguration("complex nontrivial Floquet exponent" + at_x(f.x));
      Vec v0 = real_eigenvector(f.b, mu.real());
      orient(v0);
      Mat vn(n, np);
      for (int p = 0; p < np; ++p) {
        const double t = phis(p) / f.omega;
        vn.col(p) = std::exp(-mu.real() * t) * (phi_t[static_cast<std::size_t>(p)] * v0);
      }
      f.vN.push_back(std::move(vn));
    }
    frames[i] = std::move(f);
  });

  // sign continuity of the normal eigenvectors along x
  for (int i = 1; i < nx; ++i) {
    auto& cur = frames[static_cast<std::size_t>(i)];
    const auto& prev = frames[static_cast<std::size_t>(i - 1)];
    for (std::size_t j = 0; j < cur.vN.size(); ++j)
      if (cur.vN[j].col(0).dot(prev.vN[j].col(0)) < 0.0) cur.vN[j] = -cur.vN[j];
  }

  for_each_slice(static_cast<std::size_t>(nx), policy, [&](std::size_t i) {
    auto& f = frames[i];
    const Mat w0 = f.basis(0);
    const Mat df = spec.layer().jacobian(family.gamma0[i].col(0));
    Mat wdot = df * w0;
    wdot.col(1) -= (f.omega_prime / f.omega) * w0.col(0);
    for (std::size_t j = 0; j < f.vN.size(); ++j) {
      const auto col = static_cast<Eigen::Index>(2 + j);
      wdot.col(col) -= f.exponents.mu[family.k + 1 + j].real() * w0.col(col);
    }
    f.c = w0.colPivHouseholderQr().solve(df * w0 - wdot);

    const int samples = std::max(2, options.decomposition_samples);
    for (int s = 0; s <= samples; ++s) {
      const int p = static_cast<int>(std::lround(static_cast<double>(s) * (np - 1) / samples));
      const double r = decomposition_residual(f, family, static_cast<int>(i), p);
      if (!(r <= options.decomposition_tol)) {
        std::ostringstream os;
        os << "Floquet decomposition residual " << r << " at phase node " << p << at_x(f.x);
        throw DecompositionInconsistency(os.str());
      }
    }
  });
  return frames;
}

double decomposition_residual(const FloquetFrame& frame, const OrbitFamily& family, int xi, int p) {
  const double t = family.phi_grid().value(p) / frame.omega;
  const Mat& phi = family.transition[static_cast<std::size_t>(xi)][static_cast<std::size_t>(p)];
  const Mat w0 = frame.basis(0);
  const Mat rebuilt = frame.basis(p) * matrix_exp(frame.c * t) * w0.inverse();
  return (phi - rebuilt).cwiseAbs().maxCoeff();
}

FrameCheck check_frames(const std::vector<FloquetFrame>& frames, const OrbitFamily& family) {
  FrameCheck out;
  std::vector<double> lambdas;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    const auto xi = static_cast<int>(i);
    const Mat etb = matrix_exp(f.period * f.b);
    out.max_exp_mismatch = std::max(out.max_exp_mismatch, relative_frobenius(etb, f.monodromy));
    const Mat w0 = f.basis(0);
    for (int p = 0; p < f.phi_count(); ++p) {
      const Mat& phi = family.transition[i][static_cast<std::size_t>(p)];
      out.max_vr_transport =
          std::max(out.max_vr_transport, (phi * f.vR.col(0) - f.vR.col(p)).lpNorm<Eigen::Infinity>());
      const Mat w = f.basis(p);
      const Mat winv = w.inverse();
      const Mat tangent = phi * w0.leftCols(1 + static_cast<Eigen::Index>(f.vS.size()));
      const auto normal_rows = static_cast<Eigen::Index>(f.vN.size());
      const double leak = (winv.bottomRows(normal_rows) * tangent).lpNorm<Eigen::Infinity>();
      out.max_tangent_leak = std::max(out.max_tangent_leak, leak);
      if (p % 16 == 0 || p == f.phi_count() - 1)
        out.max_decomposition = std::max(out.max_decomposition, decomposition_residual(f, family, xi, p));
    }
    const int last = f.phi_count() - 1;
    out.max_closure = std::max(out.max_closure, (f.basis(0) - f.basis(last)).cwiseAbs().maxCoeff());
    lambdas.push_back(f.exponents.lambda);
  }
  // a jump ten times larger than its neighbours signals eigenvector mis-tracking
  for (std::size_t i = 1; i + 1 < lambdas.size(); ++i) {
    const double d = std::abs(lambdas[i + 1] - lambdas[i]);
    const double left = std::abs(lambdas[i] - lambdas[i - 1]);
    const double right = i + 2 < lambdas.size() ? std::abs(lambdas[i + 2] - lambdas[i + 1]) : left;
    if (d > 10.0 * std::max(left, right) + 1e-8 * std::abs(lambdas[i])) out.lambda_continuous = false;
  }
  return out;
}

}  // namespace slowman
