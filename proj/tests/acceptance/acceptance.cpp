// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Usage: acceptance [criterion numbers...]
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "../unit/fixtures.hpp"
#include "slowman/reduced.hpp"
#include "stages.hpp"

using namespace slowman;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Ellipsoid at a = 1, rho = 5/3 over [0.1 pi, 0.9 pi], 256 phases, order 1.
struct EllipsoidRun {
  fixtures::Pipeline p;
  CorrectionOrderJ c;
  Inhomogeneity g;
  double seconds = 0.0;
};

const EllipsoidRun& ellipsoid() {
  static const EllipsoidRun run = [] {
    omp_set_num_threads(1);
    const auto t0 = std::chrono::steady_clock::now();
    EllipsoidRun r;
    const UniformGrid1D xg(0.1 * kPi, 0.9 * kPi, 64);
    r.p.spec = builtin_bent_ellipsoid(1.0, 5.0 / 3.0);
    r.p.fam = family_from_closed_form(
        r.p.spec, [](double x, double phi) { return bent_ellipsoid_orbit(1.0, 5.0 / 3.0, x, phi); },
        [](double) { return 2 * kPi; }, xg, 256, ExecutionPolicy::serial);
    r.p.frames = compute_frames(r.p.spec, r.p.fam, {}, ExecutionPolicy::serial);
    r.p.field = build_projector_field(r.p.frames, 1e8, ExecutionPolicy::serial);
    r.g = build_inhomogeneity(r.p.spec, r.p.fam, {}, 1);
    r.c = solve_order(r.p.spec, r.p.fam, r.p.frames, r.p.field, {}, 1, {}, ExecutionPolicy::serial);
    r.seconds = seconds_since(t0);
    omp_set_num_threads(omp_get_num_procs());
    return r;
  }();
  return run;
}

// MLT over U = [0.077, 0.142] with 33 x-nodes and 256 phases, continued from x = 0.12.
struct MltRun {
  fixtures::Pipeline p;
  CorrectionOrderJ c;
  Inhomogeneity g;
};

const MltRun& mlt() {
  static const MltRun run = [] {
    MltRun r;
    r.p.spec = builtin_morris_lecar_terman(-0.12);
    ShootingOptions so;
    so.phi_count = 256;
    const auto guess = guess_from_simulation(r.p.spec, Eigen::Vector3d(0.3, 0.0, 0.12), 200.0, 100.0);
    const auto seed = shoot_periodic_orbit(r.p.spec, 0.12, guess, std::nullopt, so);
    ContinuationOptions co;
    co.shooting = so;
    r.p.fam = continue_family(r.p.spec, seed, UniformGrid1D(0.077, 0.142, 33), co);
    r.p.frames = compute_frames(r.p.spec, r.p.fam);
    r.p.field = build_projector_field(r.p.frames);
    r.g = build_inhomogeneity(r.p.spec, r.p.fam, {}, 1);
    r.c = solve_order(r.p.spec, r.p.fam, r.p.frames, r.p.field, {}, 1);
    return r;
  }();
  return run;
}

// The same run without its first x-node (the one next to the SNIC), for diagnostics only.
struct Interior {
  fixtures::Pipeline p;
  CorrectionOrderJ c;
  Inhomogeneity g;
};

const Interior& mlt_interior() {
  static const Interior in = [] {
    const auto& m = mlt();
    Interior r{m.p, m.c, m.g};
    auto drop = [](auto& v) { v.erase(v.begin()); };
    const auto& xg = m.p.fam.x_grid;
    const UniformGrid1D g(xg.value(1), xg.end(), xg.count() - 1);
    r.p.fam.x_grid = r.p.field.x_grid = g;
    drop(r.p.fam.gamma0);
    drop(r.p.fam.transition);
    r.p.fam.tau = SampledCurve(g, m.p.fam.tau.samples.rightCols(g.count()));
    r.p.fam.omega = SampledCurve(g, m.p.fam.omega.samples.rightCols(g.count()));
    drop(r.p.frames);
    for (auto* f : {&r.p.field.w, &r.p.field.winv, &r.p.field.psi, &r.p.field.pi_r, &r.p.field.pi_s, &r.p.field.pi_n})
      drop(*f);
    drop(r.g.g);
    r.c.r = m.c.r.rightCols(g.count());
    r.c.b = m.c.b.rightCols(g.count());
    for (auto* v : {&r.c.k_matrix, &r.c.gamma_n, &r.c.gamma, &r.c.gamma_m}) drop(*v);
    for (auto* v : {&r.c.k_condition, &r.c.resonance_norm, &r.c.step3_residual}) drop(*v);
    return r;
  }();
  return in;
}

Verdict c1() {
  const auto& e = ellipsoid();
  double err = 0.0;
  for (int xi = 0; xi < e.p.fam.x_count(); ++xi) {
    const double x = e.p.fam.x_grid.value(xi);
    err = std::max(err, std::abs(e.c.r(0, xi) - (std::sin(4 * x) - std::sin(2 * x)) / 64.0));
  }
  return {err <= 1e-6 && e.seconds <= 30.0,
          "max |r1_x - (sin4x - sin2x)/64| = " + fmt("%.2e", err) + ", " + fmt("%.2f", e.seconds) +
              " s single-threaded"};
}

Verdict c2() {
  const auto& e = ellipsoid();
  const ReducedModel model(e.p.fam, {e.c});
  const auto roots = section_equilibria(model, 0.01);
  const double expected[] = {kPi / 6, kPi / 2, 5 * kPi / 6};
  const Stability pattern[] = {Stability::stable, Stability::unstable, Stability::stable};
  bool ok = roots.size() == 3;
  double err = 0.0;
  std::string kinds;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    kinds += (i ? "/" : "") + to_string(roots[i].stability);
    if (i < 3) {
      err = std::max(err, std::abs(roots[i].x - expected[i]));
      ok = ok && roots[i].stability == pattern[i];
    }
  }
  ok = ok && err <= 1e-6;
  return {ok, std::to_string(roots.size()) + " roots, max error " + fmt("%.2e", err) + ", " + kinds};
}

Verdict c3() {
  const oracle::EllipsoidParams prm{1.0, 5.0 / 3.0};
  const double self = oracle::self_test(prm);
  if (!(self <= 1e-9)) return {false, "oracle self-test residual " + fmt("%.2e", self)};
  const auto& e = ellipsoid();
  const UniformGrid1D pg = e.p.fam.phi_grid();
  double en = 0.0, eg = 0.0;
  for (int xi = 0; xi < e.p.fam.x_count(); ++xi) {
    const double x = e.p.fam.x_grid.value(xi);
    const auto i = static_cast<std::size_t>(xi);
    for (int q = 0; q < e.p.fam.phi_count; ++q) {
      const double phi = pg.value(q);
      en = std::max(en, (e.c.gamma_n[i].col(q) - oracle::gamma1_normal(prm, x, phi)).cwiseAbs().maxCoeff());
      eg = std::max(eg, (e.c.gamma[i].col(q) - oracle::gamma1(prm, x, phi)).cwiseAbs().maxCoeff());
    }
  }
  return {en <= 1e-5 && eg <= 1e-5, "self-test " + fmt("%.1e", self) + ", GammaN error " + fmt("%.2e", en) +
                                        ", Gamma error " + fmt("%.2e", eg)};
}

Verdict c4() {
  const auto& e = ellipsoid();
  double err = 0.0;
  for (const auto& f : e.p.frames) {
    const Eigen::VectorXcd ev = f.b.eigenvalues();
    std::vector<double> re;
    for (int i = 0; i < ev.size(); ++i) {
      err = std::max(err, std::abs(ev(i).imag()));
      re.push_back(ev(i).real());
    }
    std::sort(re.begin(), re.end());
    const double want[] = {-(1 + std::sin(f.x)), 0.0, 0.0};
    for (int i = 0; i < 3; ++i) err = std::max(err, std::abs(re[static_cast<std::size_t>(i)] - want[i]));
  }
  return {err <= 1e-8, "max eigenvalue error " + fmt("%.2e", err)};
}

Verdict c5() {
  bool ok = true;
  std::string detail;
  for (const auto* p : {&ellipsoid().p, &mlt().p}) {
    const auto pc = check_projectors(p->field);
    ok = ok && pc.partition <= 1e-10 && pc.idempotence <= 1e-9 && pc.annihilation <= 1e-9;
    detail += (detail.empty() ? "" : "; ") + p->spec.name + ": partition " + fmt("%.1e", pc.partition) +
              ", idempotence " + fmt("%.1e", pc.idempotence) + ", annihilation " + fmt("%.1e", pc.annihilation);
  }
  return {ok, detail};
}

Verdict c6() {
  const auto& e = ellipsoid();
  const auto& m = mlt();
  const auto he = check_correction(e.p.spec, e.p.fam, e.p.frames, e.p.field, e.g, e.c);
  const auto hm = check_correction(m.p.spec, m.p.fam, m.p.frames, m.p.field, m.g, m.c);
  const auto& in = mlt_interior();
  const auto hi = check_correction(in.p.spec, in.p.fam, in.p.frames, in.p.field, in.g, in.c);
  return {he.residual <= 1e-5 && hm.residual <= 1e-5,
          "ellipsoid " + fmt("%.2e", he.residual) + ", mlt " + fmt("%.2e", hm.residual) + " (256 phases; " +
              fmt("%.2e", hi.residual) + " without the x = 0.077 node)"};
}

Verdict c7() {
  const auto& e = ellipsoid();
  const auto& m = mlt();
  const auto he = check_correction(e.p.spec, e.p.fam, e.p.frames, e.p.field, e.g, e.c);
  const auto hm = check_correction(m.p.spec, m.p.fam, m.p.frames, m.p.field, m.g, m.c);
  HomologicalOptions ko;
  ko.step3 = Step3Method::kappa;
  const auto k = solve_order(m.p.spec, m.p.fam, m.p.frames, m.p.field, {}, 1, ko);
  double psi2 = 0.0, agree = 0.0, psi2_in = 0.0, agree_in = 0.0;
  for (int xi = 0; xi < m.p.fam.x_count(); ++xi) {
    const auto i = static_cast<std::size_t>(xi);
    Mat psi(3, m.p.fam.phi_count);
    for (int q = 0; q < m.p.fam.phi_count; ++q) psi.col(q) = m.p.field.psi[i][static_cast<std::size_t>(q)].col(1);
    const double o = std::abs(phase_inner(k.gamma[i], psi));
    const double d = (k.gamma[i] - m.c.gamma[i]).cwiseAbs().maxCoeff();
    psi2 = std::max(psi2, o);
    agree = std::max(agree, d);
    if (xi > 0) psi2_in = std::max(psi2_in, o), agree_in = std::max(agree_in, d);
  }
  const auto& in = mlt_interior();
  const auto hi = check_correction(in.p.spec, in.p.fam, in.p.frames, in.p.field, in.g, in.c);
  const bool ok = he.orthogonality <= 1e-7 && hm.orthogonality <= 1e-7 && psi2 <= 1e-7 && agree <= 1e-7;
  return {ok, "ellipsoid " + fmt("%.1e", he.orthogonality) + ", mlt " + fmt("%.1e", hm.orthogonality) +
                  ", kappa-path psi_2 " + fmt("%.1e", psi2) + ", kappa vs stacked " + fmt("%.1e", agree) +
                  " (without the x = 0.077 node: " + fmt("%.1e", hi.orthogonality) + ", " + fmt("%.1e", psi2_in) +
                  ", " + fmt("%.1e", agree_in) + ")"};
}

Verdict c8() {
  const auto spec = builtin_morris_lecar_terman(-0.12);
  ShootingOptions so;
  so.phi_count = 128;
  const auto guess = guess_from_simulation(spec, Eigen::Vector3d(0.3, 0.0, 0.12), 200.0, 100.0);
  const auto seed = shoot_periodic_orbit(spec, 0.12, guess, std::nullopt, so);
  ContinuationOptions co;
  co.shooting = so;
  double snpo = NAN, snic = NAN, hopf = NAN;
  for (double target : {0.16, 0.07})
    for (const auto& b : detect_family_boundaries(trace_branch(spec, seed, target, co))) {
      if (b.kind == BoundaryKind::snpo) snpo = b.x;
      if (b.kind == BoundaryKind::snic) snic = b.x;
    }
  for (const auto& pt : mlt_critical_manifold_bifurcations(mlt_params_from(spec)))
    if (pt.kind == CriticalManifoldPoint::Kind::hopf && (std::isnan(hopf) || std::abs(pt.x - 0.0973) < std::abs(hopf - 0.0973)))
      hopf = pt.x;
  const bool ok = std::abs(snpo - 0.1493) <= 1e-3 && std::abs(snic - 0.0754) <= 5e-3 && std::abs(hopf - 0.0973) <= 1e-3;
  return {ok, "SNPO " + fmt("%.5f", snpo) + ", SNIC " + fmt("%.5f", snic) + ", Hopf " + fmt("%.5f", hopf)};
}

Verdict c9() {
  const auto& m = mlt();
  const ReducedModel model(m.p.fam, {m.c});
  const auto roots = section_equilibria(model, 0.01);
  std::vector<double> stable;
  for (const auto& r : roots)
    if (r.stability == Stability::stable) stable.push_back(r.x);
  if (stable.size() != 1) return {false, std::to_string(stable.size()) + " stable roots in U"};
  // independent root of the classical average by bisection
  double lo = stable[0] - 0.01, hi = stable[0] + 0.01;
  const double flo = fixtures::classical_average(m.p.spec, lo);
  if (flo * fixtures::classical_average(m.p.spec, hi) > 0) return {false, "classical average has no sign change"};
  for (int it = 0; it < 20; ++it) {
    const double mid = 0.5 * (lo + hi);
    ((fixtures::classical_average(m.p.spec, mid) > 0) == (flo > 0) ? lo : hi) = mid;
  }
  const double oracle_root = 0.5 * (lo + hi);
  const double err = std::abs(stable[0] - oracle_root);
  return {err <= 1e-3, std::to_string(roots.size()) + " root(s), stable at " + fmt("%.6f", stable[0]) +
                           ", classical average root " + fmt("%.6f", oracle_root)};
}

Verdict c10() {
  bool ok = true;
  std::string detail;
  const auto run = [&](const fixtures::Pipeline& p, const CorrectionOrderJ& c, std::vector<double> eps,
                       ShadowingSetup setup, const std::string& name) {
    const auto t0 = std::chrono::steady_clock::now();
    const ReducedModel model(p.fam, {c});
    const auto reps = shadowing_experiment(p.spec, p.fam, model, eps, setup);
    const double secs = seconds_since(t0);
    detail += (detail.empty() ? "" : "; ") + name + " ratios";
    for (std::size_t i = 0; i < reps.size(); ++i) {
      ok = ok && !reps[i].truncated;
      if (i == 0) continue;
      ok = ok && reps[i].ratio >= 1.6 && reps[i].ratio <= 2.6;
      detail += " " + fmt("%.3f", reps[i].ratio);
    }
    ok = ok && secs <= 300.0;
    detail += " (" + fmt("%.1f", secs) + " s)";
  };
  ShadowingSetup se;
  se.x0 = kPi / 3;
  se.offset = Eigen::Vector3d(-0.1, -0.3, 0.5).normalized();
  se.c = 2.0;
  run(ellipsoid().p, ellipsoid().c, {0.04, 0.02, 0.01}, se, "ellipsoid");
  ShadowingSetup sm;
  sm.x0 = 0.11;
  sm.offset = Eigen::Vector3d(1.0, 1.0, 0.0).normalized();
  sm.c = 1.0;
  run(mlt().p, mlt().c, {0.02, 0.01, 0.005}, sm, "mlt");
  return {ok, detail};
}

Verdict c11() {
  const auto& m = mlt();
  double row = 0.0, third = 0.0, third_in = 0.0;
  for (std::size_t i = 0; i < m.p.fam.transition.size(); ++i) {
    for (const auto& phi : m.p.fam.transition[i])
      row = std::max(row, (phi.row(2) - Eigen::RowVector3d(0, 0, 1)).cwiseAbs().maxCoeff());
    const double t = m.c.gamma_n[i].row(2).cwiseAbs().maxCoeff();
    third = std::max(third, t);
    if (i > 0) third_in = std::max(third_in, t);
  }
  return {row <= 1e-10 && third <= 1e-10, "Phi row 3 deviation " + fmt("%.1e", row) + ", max |GammaN_3| " +
                                              fmt("%.1e", third) + " (" + fmt("%.1e", third_in) +
                                              " without the x = 0.077 node)"};
}

Verdict c12() {
  cli::RunConfig cfg;
  cfg.x_min = 0.1 * kPi;
  cfg.x_max = 0.9 * kPi;
  cfg.x_count = 34;
  cfg.params = {{"a", 1.0}, {"rho", 5.0 / 3.0}};
  cfg.eps = {0.04, 0.02};
  cfg.shadow_x0 = cfg.seed_x = kPi / 3;
  cfg.shadow_offset = {-0.1, -0.3, 0.5};
  cfg.shadow_c = 2.0;
  cfg.shadow_samples = 501;
  cfg.validate();
  const fs::path base = fs::temp_directory_path() / "slowman_acceptance_determinism";
  fs::remove_all(base);
  std::ostringstream log;
  for (const char* run : {"a", "b"}) {
    cli::RunOptions o;
    o.out = base / run;
    const auto res = cli::run_stage(cli::Stage::verify, cfg, o, log);
    if (res.exit_code != cli::exit_pass) return {false, "verify run failed: " + res.report.value("status", std::string())};
  }
  int files = 0, differ = 0;
  for (const auto& entry : fs::directory_iterator(base / "a")) {
    if (entry.path().extension() != ".csv") continue;
    ++files;
    const auto slurp = [](const fs::path& f) {
      std::ifstream is(f, std::ios::binary);
      return std::string(std::istreambuf_iterator<char>(is), {});
    };
    if (slurp(entry.path()) != slurp(base / "b" / entry.path().filename())) ++differ;
  }
  fs::remove_all(base);
  return {files > 0 && differ == 0, std::to_string(files) + " CSV files, " + std::to_string(differ) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"ellipsoid averaged flow", c1},     {"ellipsoid equilibria", c2},
      {"ellipsoid corrections", c3},       {"Floquet structure", c4},
      {"projector identities", c5},        {"homological residual", c6},
      {"orthogonality", c7},               {"MLT family boundaries", c8},
      {"MLT averaged equilibrium", c9},    {"shadowing scaling", c10},
      {"slow/fast structure", c11},        {"determinism", c12},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!wanted.empty() && !wanted.count(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s  %2d %-26s %s\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
