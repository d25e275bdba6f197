#include "slowman/projectors.hpp"

#include <algorithm>
#include <sstream>

#include "slowman/errors.hpp"
#include "slowman/numerics/linalg.hpp"
#include "slowman/numerics/spectral.hpp"

namespace slowman {

namespace {

template <class T>
std::vector<std::vector<T>> nested(std::size_t a, std::size_t b) {
  return std::vector<std::vector<T>>(a, std::vector<T>(b));
}

int numerical_rank(const Mat& m) {
  const Eigen::JacobiSVD<Mat> svd(m);
  const auto& s = svd.singularValues();
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) r += s(i) > 1e-8 * std::max(1.0, s(0));
  return r;
}

}  // namespace

ProjectorField build_projector_field(const std::vector<FloquetFrame>& frames, double max_condition,
                                     ExecutionPolicy policy) {
  if (frames.empty()) throw ConfigError("no Floquet frames");
  ProjectorField f;
  f.n = frames.front().n();
  f.k = static_cast<int>(frames.front().vS.size());
  f.phi_count = frames.front().phi_count();
  const auto nx = frames.size();
  const auto np = static_cast<std::size_t>(f.phi_count);
  f.x_grid = UniformGrid1D(frames.front().x, frames.back().x, static_cast<int>(nx));
  f.w = nested<Mat>(nx, np);
  f.winv = nested<Mat>(nx, np);
  f.psi = nested<Mat>(nx, np);
  f.pi_r = nested<Mat>(nx, np);
  f.pi_s = nested<Mat>(nx, np);
  f.pi_n = nested<Mat>(nx, np);
  std::vector<double> worst(nx, 0.0);
  const int n = f.n;
  const int ks = f.k;

  for_each_slice(nx, policy, [&](std::size_t i) {
    const auto& fr = frames[i];
    for (std::size_t p = 0; p < np; ++p) {
      const Mat w = fr.basis(static_cast<int>(p));
      const double cond = condition_number(w);
      if (!(cond <= max_condition)) {
        std::ostringstream os;
        os << "bundle basis has condition number " << cond << " at x = " << fr.x << ", phase node " << p;
        throw IllConditionedBasis(os.str());
      }
      worst[i] = std::max(worst[i], cond);
      const Mat winv = w.colPivHouseholderQr().inverse();
      f.pi_r[i][p] = w.col(0) * winv.row(0);
      f.pi_s[i][p] = w.middleCols(1, ks) * winv.middleRows(1, ks);
      f.pi_n[i][p] = w.rightCols(n - ks - 1) * winv.bottomRows(n - ks - 1);
      f.psi[i][p] = winv.topRows(ks + 1).transpose();
      f.w[i][p] = w;
      f.winv[i][p] = winv;
    }
  });
  f.max_condition = *std::max_element(worst.begin(), worst.end());
  return f;
}

AdjointReport check_adjoint_nullspace(const ProblemSpec& spec, const OrbitFamily& family,
                                      const std::vector<FloquetFrame>& frames, const ProjectorField& field) {
  const int nx = family.x_count();
  const int np = family.phi_count;
  const int m = field.k + 1;
  AdjointReport out{Mat::Zero(m, nx), Mat::Zero(m, nx)};
  const SpectralDifferentiator d(np);
  for (int xi = 0; xi < nx; ++xi) {
    const auto i = static_cast<std::size_t>(xi);
    const auto& fr = frames[i];
    std::vector<Mat> samples(static_cast<std::size_t>(m), Mat(field.n, np));
    std::vector<Mat> dpsi;
    for (int a = 0; a < m; ++a) {
      for (int p = 0; p < np; ++p)
        samples[static_cast<std::size_t>(a)].col(p) = field.psi[i][static_cast<std::size_t>(p)].col(a);
      dpsi.push_back(d.apply(samples[static_cast<std::size_t>(a)]));
    }
    for (int p = 0; p < np; ++p) {
      const auto pp = static_cast<std::size_t>(p);
      const Mat jt = spec.layer().jacobian(family.gamma0[i].col(p)).transpose();
      for (int a = 0; a < m; ++a) {
        const auto aa = static_cast<std::size_t>(a);
        const Vec pure = -fr.omega * dpsi[aa].col(p) - jt * samples[aa].col(p);
        Vec coupled = pure;
        for (int b = 0; b < m; ++b) coupled += field.psi[i][pp].col(b) * fr.c(a, b);
        out.pure(a, xi) = std::max(out.pure(a, xi), pure.lpNorm<Eigen::Infinity>());
        out.coupled(a, xi) = std::max(out.coupled(a, xi), coupled.lpNorm<Eigen::Infinity>());
      }
    }
  }
  return out;
}

ProjectorCheck check_projectors(const ProjectorField& field) {
  ProjectorCheck c;
  const Mat id = Mat::Identity(field.n, field.n);
  auto mx = [](const Mat& m) { return m.cwiseAbs().maxCoeff(); };
  for (std::size_t i = 0; i < field.w.size(); ++i) {
    for (std::size_t p = 0; p < field.w[i].size(); ++p) {
      const Mat& w = field.w[i][p];
      const Mat* pis[3] = {&field.pi_r[i][p], &field.pi_s[i][p], &field.pi_n[i][p]};
      const int ranks[3] = {1, field.k, field.n - field.k - 1};
      c.inverse = std::max(c.inverse, mx(w * field.winv[i][p] - id));
      c.partition = std::max(c.partition, mx(*pis[0] + *pis[1] + *pis[2] - id));
      for (int a = 0; a < 3; ++a) {
        c.idempotence = std::max(c.idempotence, mx(*pis[a] * *pis[a] - *pis[a]));
        for (int b = 0; b < 3; ++b)
          if (a != b) c.annihilation = std::max(c.annihilation, mx(*pis[a] * *pis[b]));
        if (p == 0 && numerical_rank(*pis[a]) != ranks[a]) c.ranks_ok = false;
      }
      // psi_i^T v_j = delta_ij over the tangent columns, psi_i^T vN = 0
      const Mat g = field.psi[i][p].transpose() * w;
      Mat expect = Mat::Zero(g.rows(), g.cols());
      expect.leftCols(g.rows()).setIdentity();
      c.biorthogonality = std::max(c.biorthogonality, mx(g - expect));
    }
    const auto last = field.w[i].size() - 1;
    for (const auto* pi : {&field.pi_r, &field.pi_s, &field.pi_n})
      c.closure = std::max(c.closure, mx((*pi)[i][0] - (*pi)[i][last]));
  }
  return c;
}

double semigroup_residual(const ProjectorField& field, const OrbitFamily& family, int xi, int p, int q) {
  const auto& t = family.transition[static_cast<std::size_t>(xi)];
  const Mat phi_pq = t[static_cast<std::size_t>(p)] * t[static_cast<std::size_t>(q)].inverse();
  const auto& pn = field.pi_n[static_cast<std::size_t>(xi)];
  const Mat conj = phi_pq * pn[static_cast<std::size_t>(q)] * phi_pq.inverse();
  return (pn[static_cast<std::size_t>(p)] - conj).cwiseAbs().maxCoeff();
}

Table projector_table(const ProjectorField& field) {
  Table t;
  t.meta["format"] = "slowman-projectors-1";
  t.meta["n"] = std::to_string(field.n);
  t.meta["k"] = std::to_string(field.k);
  t.meta["max_condition"] = format_double(field.max_condition);
  t.columns = {"xi", "pi", "x", "phi"};
  const auto add_block = [&](const std::string& name, int rows, int cols) {
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) t.columns.push_back(name + "_" + std::to_string(r) + std::to_string(c));
  };
  add_block("W", field.n, field.n);
  add_block("psi", field.n, field.k + 1);
  add_block("PiR", field.n, field.n);
  add_block("PiS", field.n, field.n);
  add_block("PiN", field.n, field.n);
  const UniformGrid1D pg = phase_grid(field.phi_count);
  for (std::size_t i = 0; i < field.w.size(); ++i) {
    for (std::size_t p = 0; p < field.w[i].size(); ++p) {
      std::vector<double> row{double(i), double(p), field.x_grid.value(static_cast<int>(i)),
                              pg.value(static_cast<int>(p))};
      for (const Mat* m : {&field.w[i][p], &field.psi[i][p], &field.pi_r[i][p], &field.pi_s[i][p], &field.pi_n[i][p]})
        for (Eigen::Index r = 0; r < m->rows(); ++r)
          for (Eigen::Index c = 0; c < m->cols(); ++c) row.push_back((*m)(r, c));
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

}  // namespace slowman
