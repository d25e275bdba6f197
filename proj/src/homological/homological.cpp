#include "slowman/homological.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "slowman/errors.hpp"
#include "slowman/numerics/linalg.hpp"
#include "slowman/numerics/spectral.hpp"

namespace slowman {

namespace {

std::string at_x(double x) {
  std::ostringstream os;
  os << " at x = " << x;
  return os.str();
}

// Column i of psi over every phase node, n x phi.
Mat psi_samples(const ProjectorField& field, std::size_t xi, int i) {
  const auto& ps = field.psi[xi];
  Mat out(field.n, static_cast<Eigen::Index>(ps.size()));
  for (std::size_t p = 0; p < ps.size(); ++p) out.col(static_cast<Eigen::Index>(p)) = ps[p].col(i);
  return out;
}

void check_grids(const OrbitFamily& family, const ProjectorField& field) {
  if (!(family.x_grid == field.x_grid) || family.phi_count != field.phi_count)
    throw ConfigError("projector field and orbit family are on different grids");
}

double relative_residual(const Mat& a, const Vec& x, const Vec& b) {
  const double scale = std::max({b.norm(), (a * x).norm(), 1e-300});
  return (a * x - b).norm() / scale;
}

}  // namespace

double phase_inner(const Mat& a, const Mat& b) {
  const Eigen::Index m = a.cols() - 1;
  return (a.leftCols(m).cwiseProduct(b.leftCols(m))).sum() / static_cast<double>(m);
}

Mat tangent_push(const FloquetFrame& frame, const Vec& r) {
  const auto k = static_cast<int>(frame.vS.size());
  Mat out = frame.vR * (r(k) / frame.omega);
  for (int j = 0; j < k; ++j) out += frame.vS[static_cast<std::size_t>(j)] * r(j);
  return out;
}

Mat variation_of_parameters(const ProblemSpec& spec, const OrbitFamily& family, int xi, const Mat& h,
                            bool end_correction) {
  const auto i = static_cast<std::size_t>(xi);
  const int np = family.phi_count;
  const double omega = family.omega.samples(0, xi);
  const double dphi = family.phi_grid().spacing();
  const auto& t = family.transition[i];
  const Mat& z = family.gamma0[i];

  // g(s) = Phi(phi_{p+1}, s) h(s) has g'(s) = Phi(phi_{p+1}, s) (h' - A h)(s), A = DF0 / omega
  Mat d;
  if (end_correction) {
    d = SpectralDifferentiator(np).apply(h);
    for (int p = 0; p < np; ++p) d.col(p) -= spec.layer().jacobian(z.col(p)) * h.col(p) / omega;
  }
  Mat j = Mat::Zero(h.rows(), np);
  Eigen::PartialPivLU<Mat> prev(t[0]);
  for (int p = 0; p + 1 < np; ++p) {
    const auto q = static_cast<std::size_t>(p + 1);
    const Mat step = t[q] * prev.inverse();  // Phi(phi_{p+1}, phi_p)
    Vec acc = step * j.col(p) + 0.5 * dphi * (step * h.col(p) + h.col(p + 1));
    if (end_correction) acc -= dphi * dphi / 12.0 * (d.col(p + 1) - step * d.col(p));
    j.col(p + 1) = acc;
    prev.compute(t[q]);
  }
  return j / omega;
}

Inhomogeneity build_inhomogeneity(const ProblemSpec& spec, const OrbitFamily& family,
                                  const std::vector<CorrectionOrderJ>& prior, int j,
                                  const HomologicalOptions& options) {
  if (j < 1 || j > 2) throw UnsupportedOrder("homological equation implemented for orders 1 and 2 only");
  const int nx = family.x_count();
  const int np = family.phi_count;
  auto term = [&](int i, const Vec& z) -> Vec {
    return spec.order() >= i ? spec.terms[static_cast<std::size_t>(i)].eval(z) : Vec::Zero(spec.n);
  };
  Inhomogeneity g{j, std::vector<Mat>(static_cast<std::size_t>(nx), Mat::Zero(spec.n, np))};
  if (j == 1) {
    for (int xi = 0; xi < nx; ++xi)
      for (int p = 0; p < np; ++p) g.g[static_cast<std::size_t>(xi)].col(p) = term(1, family.gamma0[static_cast<std::size_t>(xi)].col(p));
    return g;
  }

  if (prior.empty() || prior.front().order != 1) throw ConfigError("order 2 needs the order-1 correction");
  if (!options.omit_g2_hessian && !spec.layer().has_hessian())
    throw ConfigError("order 2 needs the Hessian of F0 (or omit_g2_hessian)");
  const auto& c1 = prior.front();
  const SpectralDifferentiator dphi(np);
  // d/dx of Gamma1 at fixed phase, one phase node at a time
  std::vector<Mat> dx(static_cast<std::size_t>(nx), Mat(spec.n, np));
  for (int p = 0; p < np; ++p) {
    Mat slice(spec.n, nx);
    for (int xi = 0; xi < nx; ++xi) slice.col(xi) = c1.gamma[static_cast<std::size_t>(xi)].col(p);
    const Mat d = x_derivatives(family.x_grid, slice, options.x_derivative);
    for (int xi = 0; xi < nx; ++xi) dx[static_cast<std::size_t>(xi)].col(p) = d.col(xi);
  }
  for (int xi = 0; xi < nx; ++xi) {
    const auto i = static_cast<std::size_t>(xi);
    const Mat& g1 = c1.gamma[i];
    const Mat dp = dphi.apply(g1);
    const double rx = c1.r(0, xi);
    const double rphi = c1.r(c1.r.rows() - 1, xi);
    for (int p = 0; p < np; ++p) {
      const Vec z = family.gamma0[i].col(p);
      Vec v = term(2, z) - dx[i].col(p) * rx - dp.col(p) * rphi;
      if (spec.order() >= 1) v += spec.terms[1].jacobian(z) * g1.col(p);
      if (!options.omit_g2_hessian) v += 0.5 * spec.layer().hessian_apply(z, g1.col(p), g1.col(p));
      g.g[i].col(p) = v;
    }
  }
  return g;
}

AveragedDynamics solve_averaged_dynamics(const Inhomogeneity& g, const OrbitFamily& family,
                                         const std::vector<FloquetFrame>& frames, const ProjectorField& field,
                                         const HomologicalOptions& options, ExecutionPolicy policy) {
  check_grids(family, field);
  const int nx = family.x_count();
  const int m = field.k + 1;
  AveragedDynamics out{Mat::Zero(m, nx), std::vector<Mat>(static_cast<std::size_t>(nx)), Mat::Zero(m, nx),
                       std::vector<double>(static_cast<std::size_t>(nx))};
  for_each_slice(static_cast<std::size_t>(nx), policy, [&](std::size_t i) {
    const auto& fr = frames[i];
    Mat k(m, m);
    Vec b(m);
    for (int a = 0; a < m; ++a) {
      const Mat psi = psi_samples(field, i, a);
      for (int s = 0; s < field.k; ++s) k(a, s) = phase_inner(psi, fr.vS[static_cast<std::size_t>(s)]);
      k(a, field.k) = phase_inner(psi, fr.vR) / fr.omega;
      b(a) = phase_inner(psi, g.g[i]);
    }
    const Eigen::JacobiSVD<Mat> svd(k);
    const auto& sv = svd.singularValues();
    const double ratio = sv(m - 1) / sv(0);
    if (!(ratio > options.solvability_tol))
      throw SolvabilityFailure("averaging matrix K is singular" + at_x(fr.x));
    out.k_condition[i] = 1.0 / ratio;
    out.k_matrix[i] = k;
    out.b.col(static_cast<Eigen::Index>(i)) = b;
    out.r.col(static_cast<Eigen::Index>(i)) = k.colPivHouseholderQr().solve(b);
  });
  return out;
}

std::vector<Mat> solve_normal_correction(const ProblemSpec& spec, const Inhomogeneity& g, const OrbitFamily& family,
                                         const ProjectorField& field, const HomologicalOptions& options,
                                         ExecutionPolicy policy, std::vector<double>* resonance) {
  check_grids(family, field);
  const auto nx = static_cast<std::size_t>(family.x_count());
  const int np = family.phi_count;
  const int n = family.n;
  std::vector<Mat> out(nx);
  std::vector<double> res(nx);
  for_each_slice(nx, policy, [&](std::size_t i) {
    Mat fn(n, np);
    for (int p = 0; p < np; ++p) fn.col(p) = field.pi_n[i][static_cast<std::size_t>(p)] * g.g[i].col(p);
    const Mat j = variation_of_parameters(spec, family, static_cast<int>(i), fn, options.end_correction);
    const Mat& pn0 = field.pi_n[i][0];
    const Mat a = Mat::Identity(n, n) - pn0 * family.monodromy(static_cast<int>(i)) * pn0;
    const Eigen::JacobiSVD<Mat> svd(a);
    res[i] = 1.0 / svd.singularValues()(n - 1);
    if (!(res[i] <= options.resonance_limit))
      throw NearResonance("I - M_N is nearly singular" + at_x(family.x_grid.value(static_cast<int>(i))));
    const Vec v0 = a.partialPivLu().solve(j.col(np - 1));
    Mat gn(n, np);
    const auto& t = family.transition[i];
    for (int p = 0; p < np; ++p) gn.col(p) = t[static_cast<std::size_t>(p)] * v0 + j.col(p);
    out[i] = std::move(gn);
  });
  if (resonance) *resonance = std::move(res);
  return out;
}

FullCorrection solve_full_correction(const ProblemSpec& spec, const Inhomogeneity& g, const AveragedDynamics& averaged,
                                     const std::vector<Mat>& gamma_n, const OrbitFamily& family,
                                     const std::vector<FloquetFrame>& frames, const ProjectorField& field,
                                     const HomologicalOptions& options, ExecutionPolicy policy) {
  check_grids(family, field);
  const auto nx = static_cast<std::size_t>(family.x_count());
  const int np = family.phi_count;
  const int n = family.n;
  const int m = field.k + 1;
  if (options.step3 == Step3Method::kappa && (n != 3 || field.k != 1))
    throw UnsupportedConfiguration("the kappa system is written for n = 3, k = 1");
  FullCorrection out{std::vector<Mat>(nx), std::vector<Mat>(nx), std::vector<double>(nx)};
  for_each_slice(nx, policy, [&](std::size_t i) {
    const auto xi = static_cast<int>(i);
    const auto& t = family.transition[i];
    const Mat& mono = family.monodromy(xi);
    const Mat h = g.g[i] - tangent_push(frames[i], averaged.r.col(xi));
    const Mat j = variation_of_parameters(spec, family, xi, h, options.end_correction);
    const Vec j_end = j.col(np - 1);

    // <Phi(., 0) e_c, psi_a> for every column c, and <J, psi_a>
    Mat ortho(m, n);
    Vec ortho_rhs(m);
    for (int a = 0; a < m; ++a) {
      const Mat psi = psi_samples(field, i, a);
      Vec row = Vec::Zero(n);
      for (int p = 0; p + 1 < np; ++p) row += t[static_cast<std::size_t>(p)].transpose() * psi.col(p);
      ortho.row(a) = row.transpose() / static_cast<double>(np - 1);
      ortho_rhs(a) = -phase_inner(psi, j);
    }

    Mat a;
    Vec rhs;
    if (options.step3 == Step3Method::stacked) {
      a.resize(n + m, n);
      rhs.resize(n + m);
      a.topRows(n) = Mat::Identity(n, n) - mono;
      a.bottomRows(m) = ortho;
      rhs << j_end, ortho_rhs;
    } else {
      if ((mono.row(2) - Eigen::RowVector3d(0, 0, 1)).cwiseAbs().maxCoeff() > 1e-8)
        throw UnsupportedConfiguration("the kappa system needs a standard-form monodromy (third row e3)" +
                                       at_x(family.x_grid.value(xi)));
      const double kappa = -mono(1, 0) / (1.0 - mono(0, 0));
      a = Mat::Zero(3, 3);
      a.row(0) << 1.0 - mono(0, 0), -mono(0, 1), -mono(0, 2);
      a(1, 2) = mono(1, 2) - kappa * mono(0, 2);
      a.row(2) = ortho.row(0);
      rhs.resize(3);
      rhs << j_end(0), kappa * j_end(0) - j_end(1), ortho_rhs(0);
    }
    const auto ls = solve_least_squares(a, rhs);
    out.residual[i] = relative_residual(a, ls.solution, rhs);
    if (!(out.residual[i] <= options.fredholm_tol)) {
      std::ostringstream os;
      os << "Step 3 system is inconsistent (relative residual " << out.residual[i] << ")" << at_x(family.x_grid.value(xi));
      throw FredholmViolation(os.str());
    }
    Mat gam(n, np);
    for (int p = 0; p < np; ++p) gam.col(p) = t[static_cast<std::size_t>(p)] * ls.solution + j.col(p);
    out.gamma_m[i] = gam - gamma_n[i];
    out.gamma[i] = std::move(gam);
  });
  return out;
}

CorrectionOrderJ solve_order(const ProblemSpec& spec, const OrbitFamily& family,
                             const std::vector<FloquetFrame>& frames, const ProjectorField& field,
                             const std::vector<CorrectionOrderJ>& prior, int j, const HomologicalOptions& options,
                             ExecutionPolicy policy) {
  const Inhomogeneity g = build_inhomogeneity(spec, family, prior, j, options);
  AveragedDynamics avg = solve_averaged_dynamics(g, family, frames, field, options, policy);
  CorrectionOrderJ c;
  c.order = j;
  c.gamma_n = solve_normal_correction(spec, g, family, field, options, policy, &c.resonance_norm);
  FullCorrection full = solve_full_correction(spec, g, avg, c.gamma_n, family, frames, field, options, policy);
  c.r = std::move(avg.r);
  c.k_matrix = std::move(avg.k_matrix);
  c.b = std::move(avg.b);
  c.k_condition = std::move(avg.k_condition);
  c.gamma = std::move(full.gamma);
  c.gamma_m = std::move(full.gamma_m);
  c.step3_residual = std::move(full.residual);
  return c;
}

HomologicalCheck check_correction(const ProblemSpec& spec, const OrbitFamily& family,
                                  const std::vector<FloquetFrame>& frames, const ProjectorField& field,
                                  const Inhomogeneity& g, const CorrectionOrderJ& c) {
  HomologicalCheck out;
  const int np = family.phi_count;
  const int m = field.k + 1;
  const SpectralDifferentiator d(np);
  auto mx = [](const auto& v) { return v.cwiseAbs().maxCoeff(); };
  for (int xi = 0; xi < family.x_count(); ++xi) {
    const auto i = static_cast<std::size_t>(xi);
    const auto& fr = frames[i];
    const Mat push = tangent_push(fr, c.r.col(xi));
    const Mat dg = d.apply(c.gamma[i]);
    for (int p = 0; p + 1 < np; ++p) {
      const auto pp = static_cast<std::size_t>(p);
      const Vec res = fr.omega * dg.col(p) - spec.layer().jacobian(family.gamma0[i].col(p)) * c.gamma[i].col(p) +
                      push.col(p) - g.g[i].col(p);
      out.residual = std::max(out.residual, mx(res));
      out.split = std::max(out.split, mx(c.gamma[i].col(p) - c.gamma_n[i].col(p) - c.gamma_m[i].col(p)));
      out.normal_of_tangent = std::max(out.normal_of_tangent, mx(field.pi_n[i][pp] * c.gamma_m[i].col(p)));
      out.tangent_of_normal = std::max(out.tangent_of_normal, mx(field.pi_m(xi, p) * c.gamma_n[i].col(p)));
    }
    for (int a = 0; a < m; ++a) {
      const Mat psi = psi_samples(field, i, a);
      out.orthogonality = std::max(out.orthogonality, std::abs(phase_inner(psi, c.gamma[i])));
      out.fredholm = std::max(out.fredholm, std::abs(phase_inner(psi, g.g[i] - push)));
    }
    out.closure = std::max({out.closure, mx(c.gamma[i].col(0) - c.gamma[i].col(np - 1)),
                            mx(c.gamma_n[i].col(0) - c.gamma_n[i].col(np - 1))});
  }
  return out;
}

Table averaged_table(const OrbitFamily& family, const CorrectionOrderJ& c) {
  Table t;
  const auto m = static_cast<int>(c.r.rows());
  t.meta["format"] = "slowman-averaged-1";
  t.meta["order"] = std::to_string(c.order);
  t.columns = {"xi", "x"};
  for (int a = 0; a < m; ++a) t.columns.push_back("r_" + std::to_string(a));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) t.columns.push_back("K_" + std::to_string(a) + std::to_string(b));
  for (int a = 0; a < m; ++a) t.columns.push_back("b_" + std::to_string(a));
  t.columns.insert(t.columns.end(), {"K_cond", "resonance", "step3_residual"});
  for (int xi = 0; xi < family.x_count(); ++xi) {
    const auto i = static_cast<std::size_t>(xi);
    std::vector<double> row{double(xi), family.x_grid.value(xi)};
    for (int a = 0; a < m; ++a) row.push_back(c.r(a, xi));
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) row.push_back(c.k_matrix[i](a, b));
    for (int a = 0; a < m; ++a) row.push_back(c.b(a, xi));
    row.push_back(c.k_condition[i]);
    row.push_back(i < c.resonance_norm.size() ? c.resonance_norm[i] : 0.0);
    row.push_back(i < c.step3_residual.size() ? c.step3_residual[i] : 0.0);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table correction_table(const OrbitFamily& family, const Inhomogeneity& g, const CorrectionOrderJ& c) {
  Table t;
  t.meta["format"] = "slowman-correction-1";
  t.meta["order"] = std::to_string(c.order);
  t.columns = {"xi", "pi", "x", "phi"};
  for (const char* name : {"G", "GammaN", "Gamma", "GammaM"})
    for (int r = 0; r < family.n; ++r) t.columns.push_back(std::string(name) + "_" + std::to_string(r));
  const UniformGrid1D pg = family.phi_grid();
  for (int xi = 0; xi < family.x_count(); ++xi) {
    const auto i = static_cast<std::size_t>(xi);
    for (int p = 0; p < family.phi_count; ++p) {
      std::vector<double> row{double(xi), double(p), family.x_grid.value(xi), pg.value(p)};
      for (const Mat* m : {&g.g[i], &c.gamma_n[i], &c.gamma[i], &c.gamma_m[i]})
        for (int r = 0; r < family.n; ++r) row.push_back((*m)(r, p));
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

}  // namespace slowman
