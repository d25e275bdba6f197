#include "slowman/orbit_family.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "slowman/errors.hpp"
#include "slowman/numerics/linalg.hpp"
#include "slowman/numerics/quadrature.hpp"
#include "slowman/numerics/spectral.hpp"

namespace slowman {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> unit_times(int count) {
  const UniformGrid1D g(0.0, 1.0, count);
  std::vector<double> t(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) t[static_cast<std::size_t>(i)] = g.value(i);
  return t;
}

Mat unpack_matrix(const Vec& y, int offset, int n) {
  return Eigen::Map<const Mat>(y.data() + offset, n, n);
}

}  // namespace

bool FamilyCheck::ok(const FamilyTolerances& tol) const {
  return max_closure <= tol.closure && max_conjugacy <= tol.conjugacy && min_det_transition > 0.0 &&
         identity_at_zero && tau_min >= tol.tau_min && tau_max <= tol.tau_max;
}

FamilyCheck check_family(const ProblemSpec& spec, const OrbitFamily& family) {
  FamilyCheck out;
  out.min_det_transition = std::numeric_limits<double>::infinity();
  out.tau_min = family.tau.samples.minCoeff();
  out.tau_max = family.tau.samples.maxCoeff();
  const SpectralDifferentiator diff(family.phi_count);
  const Mat identity = Mat::Identity(family.n, family.n);
  for (int xi = 0; xi < family.x_count(); ++xi) {
    const Mat& g = family.gamma0[static_cast<std::size_t>(xi)];
    out.max_closure = std::max(out.max_closure, (g.col(0) - g.col(g.cols() - 1)).lpNorm<Eigen::Infinity>());
    const Mat dg = diff.apply(g);
    const double omega = family.omega.samples(0, xi);
    for (int p = 0; p < family.phi_count; ++p) {
      const Vec r = omega * dg.col(p) - spec.layer().eval(g.col(p));
      out.max_conjugacy = std::max(out.max_conjugacy, r.lpNorm<Eigen::Infinity>());
      out.min_det_transition =
          std::min(out.min_det_transition, family.transition[static_cast<std::size_t>(xi)][static_cast<std::size_t>(p)].determinant());
    }
    if (family.transition[static_cast<std::size_t>(xi)].front() != identity) out.identity_at_zero = false;
  }
  return out;
}

OrbitFamily family_from_closed_form(const ProblemSpec& spec, const Embedding& embedding,
                                    const std::function<double(double)>& tau_map, const UniformGrid1D& x_grid,
                                    int phi_count, ExecutionPolicy policy, const FamilyTolerances& tol,
                                    const OdeOptions& ode) {
  spec.validate();
  const UniformGrid1D pg = phase_grid(phi_count);
  const int n = spec.n;

  OrbitFamily family;
  family.n = n;
  family.k = spec.k;
  family.x_grid = x_grid;
  family.phi_count = phi_count;
  family.gamma0.resize(static_cast<std::size_t>(x_grid.count()));
  family.transition.resize(static_cast<std::size_t>(x_grid.count()));
  Mat tau(1, x_grid.count());
  for (int xi = 0; xi < x_grid.count(); ++xi) tau(0, xi) = tau_map(x_grid.value(xi));
  if ((tau.array() <= 0.0).any()) throw DegenerateOrbit("closed-form period map is not positive");
  family.tau = SampledCurve(x_grid, tau);
  family.omega = SampledCurve(x_grid, (kTwoPi / tau.array()).matrix());

  std::vector<double> phis(static_cast<std::size_t>(phi_count));
  for (int p = 0; p < phi_count; ++p) phis[static_cast<std::size_t>(p)] = pg.value(p);

  for_each_slice(x_grid.count(), policy, [&](int xi) {
    const double x = x_grid.value(xi);
    const double omega = family.omega.samples(0, xi);
    Mat g(n, phi_count);
    for (int p = 0; p < phi_count; ++p) g.col(p) = embedding(x, pg.value(p));
    // dPhi/dphi = A(Gamma0(x, phi)) Phi / omega
    const OdeRhs rhs = [&](double phi, const Vec& y, Vec& dy) {
      const Mat a = spec.layer().jacobian(embedding(x, phi));
      const Mat m = unpack_matrix(y, 0, n);
      dy.resize(n * n);
      Eigen::Map<Mat>(dy.data(), n, n) = a * m / omega;
    };
    const Vec y0 = Eigen::Map<const Vec>(Mat::Identity(n, n).eval().data(), n * n);
    const OdeSolution sol = integrate_to_times(rhs, y0, phis, ode);
    if (!sol.completed) throw DomainError("variational integration left the domain at x = " + std::to_string(x));
    std::vector<Mat> trans(static_cast<std::size_t>(phi_count));
    for (int p = 0; p < phi_count; ++p) trans[static_cast<std::size_t>(p)] = unpack_matrix(sol.states[static_cast<std::size_t>(p)], 0, n);
    trans.front() = Mat::Identity(n, n);
    family.gamma0[static_cast<std::size_t>(xi)] = std::move(g);
    family.transition[static_cast<std::size_t>(xi)] = std::move(trans);
  });

  const FamilyCheck check = check_family(spec, family);
  if (check.max_conjugacy > tol.conjugacy) {
    std::ostringstream os;
    os << "embedding does not satisfy the conjugacy equation: residual " << check.max_conjugacy << " > "
       << tol.conjugacy;
    throw InconsistentEmbedding(os.str());
  }
  if (check.max_closure > tol.closure) throw InconsistentEmbedding("embedding is not 2pi-periodic in phi");
  return family;
}

// ---------------------------------------------------------------------------

ShootResult integrate_orbit(const ProblemSpec& spec, double x, const Vec& state, double period, int phi_count,
                            const OdeOptions& ode) {
  const int n = spec.n;
  const OdeRhs rhs = [&](double, const Vec& y, Vec& dy) {
    const Vec z = y.head(n);
    dy.resize(n + n * n);
    dy.head(n) = period * spec.layer().eval(z);
    Eigen::Map<Mat>(dy.data() + n, n, n) = period * spec.layer().jacobian(z) * unpack_matrix(y, n, n);
  };
  Vec y0(n + n * n);
  y0.head(n) = state;
  y0.tail(n * n) = Eigen::Map<const Vec>(Mat::Identity(n, n).eval().data(), n * n);
  const OdeSolution sol = integrate_to_times(rhs, y0, unit_times(phi_count), ode);
  if (!sol.completed) {
    std::ostringstream os;
    os << "orbit integration left the domain at t~ = " << sol.stop_time << " (x = " << x << ")";
    throw DomainError(os.str());
  }
  ShootResult out;
  out.x = x;
  out.period = period;
  Mat z(n, phi_count);
  out.phi.resize(static_cast<std::size_t>(phi_count));
  for (int i = 0; i < phi_count; ++i) {
    const Vec& y = sol.states[static_cast<std::size_t>(i)];
    z.col(i) = y.head(n);
    out.phi[static_cast<std::size_t>(i)] = unpack_matrix(y, n, n);
  }
  out.phi.front() = Mat::Identity(n, n);
  out.orbit = SampledCurve(UniformGrid1D(0.0, 1.0, phi_count), std::move(z), true);
  out.residual = out.orbit.closure_error();
  return out;
}

OrbitGuess guess_from_simulation(const ProblemSpec& spec, const Vec& start, double settle_time, double max_period,
                                 const OdeOptions& ode) {
  const OdeRhs rhs = [&](double, const Vec& y, Vec& dy) { dy = spec.layer().eval(y); };
  const OdeSolution settle = integrate_to_times(rhs, start, {0.0, settle_time}, ode);
  if (!settle.completed) throw DomainError("simulation left the domain while settling");
  const Vec z0 = settle.states.back();
  const Vec normal = spec.layer().eval(z0);
  if (normal.norm() < 1e-10) throw DegenerateOrbit("simulation settled on an equilibrium");

  const int samples = 20000;
  std::vector<double> times(samples + 1);
  for (int i = 0; i <= samples; ++i) times[static_cast<std::size_t>(i)] = max_period * i / samples;
  const OdeSolution sweep = integrate_to_times(rhs, z0, times, ode);
  double prev = 0.0;
  bool left = false;
  for (std::size_t i = 1; i < sweep.states.size(); ++i) {
    const Vec d = sweep.states[i] - z0;
    const double s = normal.dot(d);
    if (d.norm() > 1e-3 * (1.0 + z0.norm())) left = true;
    if (left && prev < 0.0 && s >= 0.0) {
      const double t = sweep.times[i - 1] + (sweep.times[i] - sweep.times[i - 1]) * (-prev) / (s - prev);
      return {z0, t};
    }
    prev = s;
  }
  throw DegenerateOrbit("no return to the section within the period limit");
}

ShootResult shoot_periodic_orbit(const ProblemSpec& spec, double x, const OrbitGuess& guess,
                                 const std::optional<SampledCurve>& anchor, const ShootingOptions& options) {
  spec.validate();
  const int n = spec.n;
  const int k = spec.k;
  const int count = options.phi_count;

  const SampledCurve ref =
      anchor ? *anchor : integrate_orbit(spec, x, guess.state, guess.period, count, options.ode).orbit;
  if (ref.count() != count || ref.dim() != n) throw InvalidGrid("phase anchor does not match the shooting grid");
  Mat ref_dot(n, count);
  for (int i = 0; i < count; ++i) ref_dot.col(i) = spec.layer().eval(ref.samples.col(i));

  const Vec target = Vec::Constant(k, x);
  Vec z0 = guess.state;
  double period = guess.period;
  double last = std::numeric_limits<double>::infinity();

  const UniformGrid1D tgrid(0.0, 1.0, count);
  for (int iter = 0; iter <= options.max_iter; ++iter) {
    if (!std::isfinite(period) || period < options.period_min) {
      std::ostringstream os;
      os << "period collapsed to " << period << " at x = " << x;
      throw DegenerateOrbit(os.str());
    }
    if (period > options.period_max) {
      std::ostringstream os;
      os << "period diverged to " << period << " at x = " << x;
      throw DegenerateOrbit(os.str());
    }
    ShootResult sol;
    try {
      sol = integrate_orbit(spec, x, z0, period, count, options.ode);
    } catch (const DomainError& e) {
      throw ConvergenceError(std::string("shooting: ") + e.what(), last);
    }
    const Vec z1 = sol.orbit.samples.col(count - 1);

    // residual: periodicity, integral phase condition, slow chart pin
    Vec r(n + 1 + k);
    r.head(n) = z1 - z0;
    Mat phase_terms(1 + n + 1, count);
    for (int i = 0; i < count; ++i) {
      const Vec zi = sol.orbit.samples.col(i);
      const Vec dz = zi - ref.samples.col(i);
      phase_terms(0, i) = ref_dot.col(i).dot(dz);
      phase_terms.block(1, i, n, 1) = (ref_dot.col(i).transpose() * sol.phi[static_cast<std::size_t>(i)]).transpose();
      phase_terms(n + 1, i) = tgrid.value(i) * ref_dot.col(i).dot(spec.layer().eval(zi));
    }
    const Vec phase = trapezoid_integrate(SampledCurve(tgrid, phase_terms));
    r(n) = phase(0);
    r.tail(k) = spec.slow_chart(z0) - target;
    last = r.lpNorm<Eigen::Infinity>();
    sol.iterations = iter;
    sol.residual = last;
    if (!r.allFinite()) throw ConvergenceError("shooting residual is not finite", last);
    if (last <= options.bvp_tol) {
      double speed = 0.0;
      for (int i = 0; i < count; ++i) speed = std::max(speed, spec.layer().eval(sol.orbit.samples.col(i)).norm());
      if (speed < 1e-8) {
        std::ostringstream os;
        os << "shooting collapsed onto an equilibrium at x = " << x;
        throw DegenerateOrbit(os.str());
      }
      return sol;
    }
    if (iter == options.max_iter) break;

    Mat jac = Mat::Zero(n + 1 + k, n + 1);
    jac.topLeftCorner(n, n) = sol.phi.back() - Mat::Identity(n, n);
    jac.block(0, n, n, 1) = spec.layer().eval(z1);
    jac.block(n, 0, 1, n) = phase.segment(1, n).transpose();
    jac(n, n) = phase(n + 1);
    jac.bottomLeftCorner(k, n) = spec.slow_chart_jacobian(z0);
    const LeastSquaresResult step = solve_least_squares(jac, -r);
    double scale = 1.0;
    // keep the period positive and the step modest
    if (step.solution(n) < -0.5 * period) scale = -0.5 * period / step.solution(n);
    z0 += scale * step.solution.head(n);
    period += scale * step.solution(n);
  }
  std::ostringstream os;
  os << "shooting did not converge at x = " << x << " in " << options.max_iter << " iterations (residual " << last
     << ")";
  throw ConvergenceError(os.str(), last);
}

std::vector<std::complex<double>> floquet_multipliers(const Mat& monodromy) {
  const Eigen::EigenSolver<Mat> es(monodromy, false);
  std::vector<std::complex<double>> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::stable_sort(out.begin(), out.end(), [](auto a, auto b) { return std::abs(a - 1.0) < std::abs(b - 1.0); });
  return out;
}

}  // namespace slowman
