#include "stages.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "slowman/errors.hpp"
#include "slowman/homological.hpp"
#include "slowman/io.hpp"
#include "slowman/oracle/ellipsoid_oracle.hpp"
#include "slowman/reduced.hpp"
#include "svg.hpp"

namespace slowman::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write '" + path.string() + "'");
  os << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void save_table(const fs::path& path, const Table& t) {
  std::ostringstream os;
  write_table(os, t);
  write_text(path, os.str());
}

Table load_table(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  return read_table(is);
}

std::size_t column(const Table& t, const std::string& name) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), name);
  if (it == t.columns.end()) throw ConfigError("table lacks column '" + name + "'");
  return static_cast<std::size_t>(it - t.columns.begin());
}

std::string eps_tag(std::size_t i) { return "eps" + std::to_string(i); }

// Collects named checks; `pass` is false once any fails.
struct Checks {
  json list = json::array();
  bool pass = true;

  void at_most(const std::string& stage, const std::string& name, double value, double limit) {
    const bool ok = std::isfinite(value) && value <= limit;
    list.push_back({{"stage", stage}, {"name", name}, {"value", value}, {"limit", limit}, {"pass", ok}});
    pass = pass && ok;
  }
  void within(const std::string& stage, const std::string& name, double value, double lo, double hi) {
    const bool ok = value >= lo && value <= hi;
    list.push_back({{"stage", stage}, {"name", name}, {"value", value}, {"band", {lo, hi}}, {"pass", ok}});
    pass = pass && ok;
  }
  void holds(const std::string& stage, const std::string& name, bool ok) {
    list.push_back({{"stage", stage}, {"name", name}, {"pass", ok}});
    pass = pass && ok;
  }
};

ProblemSpec make_spec(const RunConfig& c) {
  if (c.system == "ellipsoid") return builtin_bent_ellipsoid(c.params.at("a"), c.params.at("rho"));
  MltParams p;
  const std::map<std::string, double*> fields{{"g_l", &p.g_l}, {"g_k", &p.g_k}, {"g_ca", &p.g_ca}, {"v_l", &p.v_l},
                                              {"v_k", &p.v_k}, {"v_ca", &p.v_ca}, {"c1", &p.c1},   {"c2", &p.c2},
                                              {"c3", &p.c3},   {"c4", &p.c4},   {"tau0", &p.tau0}, {"k", &p.k}};
  for (const auto& [key, value] : c.params) *fields.at(key) = value;
  return builtin_morris_lecar_terman(p);
}

// Rebuilds a correction from its two persisted tables.
CorrectionOrderJ read_correction(const Table& averaged, const Table& nodes, const OrbitFamily& family,
                                 Inhomogeneity& g) {
  const int nx = family.x_count(), np = family.phi_count, n = family.n, m = family.k + 1;
  if (averaged.rows.size() != static_cast<std::size_t>(nx) ||
      nodes.rows.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(np))
    throw ConfigError("cached correction does not match the family grid");
  CorrectionOrderJ c;
  c.order = std::stoi(averaged.meta.at("order"));
  g.order = c.order;
  c.r = Mat(m, nx);
  c.b = Mat(m, nx);
  for (int xi = 0; xi < nx; ++xi) {
    const auto& row = averaged.rows[static_cast<std::size_t>(xi)];
    Mat k(m, m);
    for (int a = 0; a < m; ++a) {
      c.r(a, xi) = row[column(averaged, "r_" + std::to_string(a))];
      c.b(a, xi) = row[column(averaged, "b_" + std::to_string(a))];
      for (int b = 0; b < m; ++b) k(a, b) = row[column(averaged, "K_" + std::to_string(a) + std::to_string(b))];
    }
    c.k_matrix.push_back(k);
    c.k_condition.push_back(row[column(averaged, "K_cond")]);
    c.resonance_norm.push_back(row[column(averaged, "resonance")]);
    c.step3_residual.push_back(row[column(averaged, "step3_residual")]);
  }
  g.g.assign(static_cast<std::size_t>(nx), Mat(n, np));
  c.gamma_n = c.gamma = c.gamma_m = g.g;
  const std::size_t base = column(nodes, "G_0");
  for (const auto& row : nodes.rows) {
    const auto xi = static_cast<std::size_t>(row[0]);
    const auto p = static_cast<Eigen::Index>(row[1]);
    if (xi >= static_cast<std::size_t>(nx) || p >= np) throw ConfigError("cached correction index out of range");
    std::size_t col = base;
    for (auto* target : {&g.g[xi], &c.gamma_n[xi], &c.gamma[xi], &c.gamma_m[xi]})
      for (int r = 0; r < n; ++r) (*target)(r, p) = row[col++];
  }
  return c;
}

// Lazily builds each stage's products and records their checks.
class Pipeline {
 public:
  Pipeline(const RunConfig& c, const RunOptions& o, std::ostream& log)
      : cfg_(c), opt_(o), log_(log), spec_(make_spec(c)) {}

  Checks checks;
  json summary = json::object();

  const OrbitFamily& family() {
    if (family_) return *family_;
    const fs::path path = opt_.out / "family.txt";
    const std::string key = hex(fnv1a(cfg_.family_key()));
    if (opt_.family_in) {
      family_ = load_family(*opt_.family_in);
      log_ << "family: loaded " << opt_.family_in->string() << "\n";
    } else if (opt_.stage_cache && requested_ != Stage::family) {
      require(path, Stage::family);
      if (read_text(opt_.out / "family.key") != key + "\n")
        throw DependencyError("stage 'family' artifact is stale (config changed); rerun `family`", Stage::family);
      family_ = load_family(path);
      log_ << "family: loaded from cache\n";
    } else {
      family_ = build_family();
      std::ostringstream os;
      write_family(os, *family_);
      write_text(path, os.str());
      write_text(opt_.out / "family.key", key + "\n");
      if (opt_.family_out) write_text(*opt_.family_out, os.str());
      write_frequency();
    }
    const auto fc = check_family(spec_, *family_);
    checks.at_most("family", "closure", fc.max_closure, 1e-9);
    checks.at_most("family", "conjugacy", fc.max_conjugacy, cfg_.tol_family_conjugacy);
    checks.holds("family", "identity_at_zero", fc.identity_at_zero);
    summary["family"] = {{"x_count", family_->x_count()},
                         {"phi_count", family_->phi_count},
                         {"tau_min", fc.tau_min},
                         {"tau_max", fc.tau_max}};
    return *family_;
  }

  const std::vector<FloquetFrame>& frames() {
    if (!frames_.empty()) return frames_;
    const auto& fam = family();
    frames_ = compute_frames(spec_, fam, {}, cfg_.policy);
    const auto fc = check_frames(frames_, fam);
    checks.at_most("floquet", "decomposition", fc.max_decomposition, cfg_.tol_decomposition);
    checks.at_most("floquet", "closure", fc.max_closure, cfg_.tol_decomposition);
    checks.at_most("floquet", "exp_mismatch", fc.max_exp_mismatch, cfg_.tol_decomposition);
    checks.holds("floquet", "lambda_continuous", fc.lambda_continuous);
    double lambda_min = INFINITY;
    for (const auto& f : frames_) lambda_min = std::min(lambda_min, f.exponents.lambda);
    summary["floquet"] = {{"lambda_min", lambda_min}};
    write_floquet();
    return frames_;
  }

  const ProjectorField& field() {
    if (field_) return *field_;
    frames();
    field_ = build_projector_field(frames_, 1e8, cfg_.policy);
    const auto pc = check_projectors(*field_);
    checks.at_most("project", "inverse", pc.inverse, cfg_.tol_projector);
    checks.at_most("project", "partition", pc.partition, cfg_.tol_projector);
    checks.at_most("project", "idempotence", pc.idempotence, cfg_.tol_projector);
    checks.at_most("project", "annihilation", pc.annihilation, cfg_.tol_projector);
    checks.holds("project", "ranks", pc.ranks_ok);
    const auto adj = check_adjoint_nullspace(spec_, *family_, frames_, *field_);
    summary["project"] = {{"max_condition", field_->max_condition},
                          {"adjoint_pure", adj.max_pure()},
                          {"adjoint_coupled", adj.max_coupled()}};
    save_table(opt_.out / "projectors.csv", projector_table(*field_));
    Table t;
    t.meta["format"] = "slowman-adjoint-1";
    t.columns = {"xi", "x"};
    for (int i = 0; i < adj.pure.rows(); ++i) t.columns.push_back("pure_" + std::to_string(i));
    for (int i = 0; i < adj.coupled.rows(); ++i) t.columns.push_back("coupled_" + std::to_string(i));
    for (int xi = 0; xi < family_->x_count(); ++xi) {
      std::vector<double> row{double(xi), family_->x_grid.value(xi)};
      for (int i = 0; i < adj.pure.rows(); ++i) row.push_back(adj.pure(i, xi));
      for (int i = 0; i < adj.coupled.rows(); ++i) row.push_back(adj.coupled(i, xi));
      t.rows.push_back(std::move(row));
    }
    save_table(opt_.out / "adjoint.csv", t);
    return *field_;
  }

  const std::vector<CorrectionOrderJ>& corrections() {
    if (!corrections_.empty()) return corrections_;
    const auto& fam = family();
    const std::string key = hex(fnv1a(cfg_.canonical()));
    if (opt_.stage_cache && requested_ != Stage::homological) {
      for (int j = 1; j <= cfg_.order; ++j) {
        const auto a = opt_.out / ("averaged_" + std::to_string(j) + ".csv");
        const auto n = opt_.out / ("correction_" + std::to_string(j) + ".csv");
        require(a, Stage::homological);
        require(n, Stage::homological);
        Inhomogeneity g;
        corrections_.push_back(read_correction(load_table(a), load_table(n), fam, g));
        rhs_.push_back(std::move(g));
      }
      if (read_text(opt_.out / "homological.key") != key + "\n")
        throw DependencyError("stage 'homological' artifacts are stale (config changed); rerun `homological`",
                              Stage::homological);
      log_ << "homological: loaded from cache\n";
      return corrections_;
    }
    const auto& fld = field();
    HomologicalOptions ho;
    ho.omit_g2_hessian = cfg_.omit_g2_hessian;
    ho.step3 = cfg_.kappa_path ? Step3Method::kappa : Step3Method::stacked;
    json orders = json::array();
    for (int j = 1; j <= cfg_.order; ++j) {
      rhs_.push_back(build_inhomogeneity(spec_, fam, corrections_, j, ho));
      corrections_.push_back(solve_order(spec_, fam, frames_, fld, corrections_, j, ho, cfg_.policy));
      const auto& c = corrections_.back();
      const auto hc = check_correction(spec_, fam, frames_, fld, rhs_.back(), c);
      const std::string stage = "homological";
      const std::string tag = "order" + std::to_string(j) + "_";
      checks.at_most(stage, tag + "residual", hc.residual, cfg_.tol_residual);
      checks.at_most(stage, tag + "orthogonality", hc.orthogonality, cfg_.tol_orthogonality);
      checks.at_most(stage, tag + "fredholm", hc.fredholm, cfg_.tol_fredholm);
      checks.at_most(stage, tag + "split", hc.split, 1e-10);
      checks.at_most(stage, tag + "closure", hc.closure, 1e-8);
      orders.push_back({{"order", j},
                        {"normal_of_tangent", hc.normal_of_tangent},
                        {"tangent_of_normal", hc.tangent_of_normal},
                        {"max_resonance", *std::max_element(c.resonance_norm.begin(), c.resonance_norm.end())}});
      save_table(opt_.out / ("averaged_" + std::to_string(j) + ".csv"), averaged_table(fam, c));
      save_table(opt_.out / ("correction_" + std::to_string(j) + ".csv"), correction_table(fam, rhs_.back(), c));
    }
    summary["homological"] = orders;
    write_text(opt_.out / "homological.key", key + "\n");
    write_r1();
    return corrections_;
  }

  const ReducedModel& model() {
    if (!model_) model_ = ReducedModel(family(), corrections());
    return *model_;
  }

  void run_reduce() {
    const auto& m = model();
    Table eq;
    eq.meta["format"] = "slowman-equilibria-1";
    eq.columns = {"eps", "x", "stable", "slope"};
    std::vector<Series> profiles, paths;
    json found = json::array();
    for (std::size_t i = 0; i < cfg_.eps.size(); ++i) {
      const double e = cfg_.eps[i];
      for (const auto& q : section_equilibria(m, e)) {
        eq.add_row({e, q.x, q.stability == Stability::stable ? 1.0 : 0.0, q.slope});
        found.push_back({{"eps", e}, {"x", q.x}, {"stability", to_string(q.stability)}});
        log_ << "reduce: eps " << e << " equilibrium x = " << q.x << " (" << to_string(q.stability) << ")\n";
      }
      Series prof{"eps " + format_double(e), {}, {}};
      const auto& g = m.x_grid();
      for (int k = 0; k <= 8 * (g.count() - 1); ++k) {
        const double x = g.start() + (g.end() - g.start()) * k / (8.0 * (g.count() - 1));
        prof.x.push_back(x);
        prof.y.push_back(m.r_x(std::min(x, g.end()), e) / e);
      }
      profiles.push_back(std::move(prof));

      const auto tr = integrate_reduced(m, cfg_.shadow_x0, cfg_.shadow_phi0, e, cfg_.reduce_horizon / e, 1001);
      Table t;
      t.meta["format"] = "slowman-reduced-1";
      t.meta["eps"] = format_double(e);
      t.meta["exited"] = tr.exited ? "true" : "false";
      t.columns = {"t", "x", "phi"};
      Series path{"eps " + format_double(e), {}, {}};
      for (int s = 0; s < tr.path.count(); ++s) {
        t.add_row({tr.path.grid.value(s), tr.path.samples(0, s), tr.path.samples(1, s)});
        path.x.push_back(tr.path.grid.value(s) * e);
        path.y.push_back(tr.path.samples(0, s));
      }
      save_table(opt_.out / ("reduced_" + eps_tag(i) + ".csv"), t);
      paths.push_back(std::move(path));
    }
    save_table(opt_.out / "equilibria.csv", eq);
    write_text(opt_.out / "r_x.svg",
               line_plot({"Averaged slow drift", "x", "r_x / eps", false, false}, profiles));
    write_text(opt_.out / "reduced.svg",
               line_plot({"Reduced trajectories", "eps t", "x", false, false}, paths));
    summary["reduce"] = {{"equilibria", found}};
  }

  void run_verify() {
    const auto& m = model();
    if (cfg_.system == "ellipsoid") {
      try {
        oracle_checks();
      } catch (const UnsupportedConfiguration& e) {
        summary["oracle"] = {{"skipped", e.what()}};
      }
    }
    ShadowingSetup setup;
    setup.x0 = cfg_.shadow_x0;
    setup.phi0 = cfg_.shadow_phi0;
    setup.offset = Eigen::Map<const Vec>(cfg_.shadow_offset.data(), 3).normalized();
    setup.c = cfg_.shadow_c;
    setup.samples = cfg_.shadow_samples;
    const auto reports = shadowing_experiment(spec_, *family_, m, cfg_.eps, setup, cfg_.policy);
    Table t;
    t.meta["format"] = "slowman-shadowing-1";
    t.columns = {"eps", "horizon", "sup_fibre_distance", "ratio", "truncated"};
    Series sup{"sup distance", {}, {}, true}, slope{"slope 1", {}, {}};
    std::vector<Series> series;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto& r = reports[i];
      t.add_row({r.eps, r.horizon, r.sup_fibre_distance, r.ratio, r.truncated ? 1.0 : 0.0});
      checks.holds("verify", "no_truncation_" + eps_tag(i), !r.truncated);
      if (i > 0) checks.within("verify", "halving_ratio_" + eps_tag(i), r.ratio, cfg_.ratio_low, cfg_.ratio_high);
      sup.x.push_back(r.eps);
      sup.y.push_back(r.sup_fibre_distance);
      log_ << "verify: eps " << r.eps << " sup distance " << r.sup_fibre_distance;
      if (i > 0) log_ << " ratio " << r.ratio;
      log_ << "\n";
      Table d;
      d.meta["format"] = "slowman-distance-1";
      d.meta["eps"] = format_double(r.eps);
      d.columns = {"t", "distance"};
      for (int s = 0; s < r.distance_series.count(); ++s)
        d.add_row({r.distance_series.grid.value(s), r.distance_series.samples(0, s)});
      save_table(opt_.out / ("distance_" + eps_tag(i) + ".csv"), d);
      Series ds{"eps " + format_double(r.eps), {}, {}};
      for (int s = 0; s < r.distance_series.count(); s += 4) {
        ds.x.push_back(r.distance_series.grid.value(s) * r.eps);
        ds.y.push_back(r.distance_series.samples(0, s));
      }
      series.push_back(std::move(ds));
    }
    if (!reports.empty() && reports.front().sup_fibre_distance > 0)
      for (const auto& r : reports) {
        slope.x.push_back(r.eps);
        slope.y.push_back(reports.front().sup_fibre_distance * r.eps / reports.front().eps);
      }
    save_table(opt_.out / "shadowing.csv", t);
    write_text(opt_.out / "shadowing.svg",
               line_plot({"Shadowing error", "eps", "sup fibre distance", true, true}, {sup, slope}));
    write_text(opt_.out / "distance.svg",
               line_plot({"Distance to the reduced fibre", "eps t", "distance", false, true}, series));
    json rows = json::array();
    for (const auto& r : reports)
      rows.push_back({{"eps", r.eps}, {"sup", r.sup_fibre_distance}, {"ratio", r.ratio}, {"truncated", r.truncated}});
    summary["verify"] = {{"shadowing", rows}};
  }

  void set_requested(Stage s) { requested_ = s; }

 private:
  const RunConfig& cfg_;
  const RunOptions& opt_;
  std::ostream& log_;
  ProblemSpec spec_;
  Stage requested_ = Stage::family;
  std::optional<OrbitFamily> family_;
  std::vector<FloquetFrame> frames_;
  std::optional<ProjectorField> field_;
  std::vector<CorrectionOrderJ> corrections_;
  std::vector<Inhomogeneity> rhs_;
  std::optional<ReducedModel> model_;

  static void require(const fs::path& path, Stage producer) {
    if (!fs::exists(path))
      throw DependencyError("missing artifact '" + path.string() + "' from stage '" + to_string(producer) +
                                "'; run `" + to_string(producer) + "` first or drop --stage-cache",
                            producer);
  }

  static OrbitFamily load_family(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DependencyError("cannot open family file '" + path.string() + "'", Stage::family);
    return read_family(is);
  }

  OrbitFamily build_family() {
    const UniformGrid1D xg(cfg_.x_min, cfg_.x_max, cfg_.x_count);
    if (cfg_.system == "ellipsoid") {
      const double a = cfg_.params.at("a"), rho = cfg_.params.at("rho");
      return family_from_closed_form(
          spec_, [a, rho](double x, double phi) { return bent_ellipsoid_orbit(a, rho, x, phi); },
          [](double) { return kTwoPi; }, xg, cfg_.phi_count, cfg_.policy);
    }
    ShootingOptions so;
    so.phi_count = cfg_.phi_count;
    const auto guess = guess_from_simulation(spec_, Eigen::Vector3d(0.3, 0.0, cfg_.seed_x), 200.0, 100.0);
    const auto seed = shoot_periodic_orbit(spec_, cfg_.seed_x, guess, std::nullopt, so);
    ContinuationOptions co;
    co.shooting = so;
    auto fam = continue_family(spec_, seed, xg, co);
    if (cfg_.trace_boundaries) trace(seed);
    return fam;
  }

  // Follows the branch past both interval ends and reports the boundaries found.
  void trace(const ShootResult& fine_seed) {
    ShootingOptions so;
    so.phi_count = cfg_.trace_phi_count;
    const auto guess = guess_from_simulation(spec_, fine_seed.orbit.samples.col(0), 50.0, 100.0);
    const auto seed = shoot_periodic_orbit(spec_, cfg_.seed_x, guess, std::nullopt, so);
    ContinuationOptions co;
    co.shooting = so;
    Table t;
    t.meta["format"] = "slowman-boundaries-1";
    t.meta["kinds"] = "0=hopf 1=snpo 2=snic";
    t.columns = {"x", "kind"};
    json found = json::array();
    for (double target : {cfg_.trace_high, cfg_.trace_low}) {
      const auto branch = trace_branch(spec_, seed, target, co);
      for (const auto& b : detect_family_boundaries(branch)) {
        t.add_row({b.x, static_cast<double>(b.kind)});
        found.push_back({{"x", b.x}, {"kind", to_string(b.kind)}});
        log_ << "family: " << to_string(b.kind) << " near x = " << b.x << "\n";
      }
      if (branch.stalled) log_ << "family: trace toward " << target << " stopped at " << branch.last_good_x << "\n";
    }
    save_table(opt_.out / "boundaries.csv", t);
    boundaries_ = found;
  }
  json boundaries_ = json::array();

  void write_frequency() {
    const auto& f = *family_;
    Table t;
    t.meta["format"] = "slowman-frequency-1";
    t.columns = {"x", "tau", "omega"};
    Series s{"omega", {}, {}};
    for (int xi = 0; xi < f.x_count(); ++xi) {
      t.add_row({f.x_grid.value(xi), f.tau.samples(0, xi), f.omega.samples(0, xi)});
      s.x.push_back(f.x_grid.value(xi));
      s.y.push_back(f.omega.samples(0, xi));
    }
    save_table(opt_.out / "frequency.csv", t);
    write_text(opt_.out / "frequency.svg", line_plot({"Frequency map", "x", "omega", false, false}, {s}));
    summary["boundaries"] = boundaries_;
  }

  void write_floquet() {
    const auto& f = *family_;
    const int n = f.n;
    Table t;
    t.meta["format"] = "slowman-floquet-1";
    t.columns = {"xi", "x", "period", "omega", "omega_prime", "lambda"};
    for (int i = 0; i < n; ++i) t.columns.insert(t.columns.end(), {"mu_re_" + std::to_string(i), "mu_im_" + std::to_string(i)});
    for (const char* name : {"M", "B", "C"})
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) t.columns.push_back(std::string(name) + "_" + std::to_string(r) + std::to_string(c));
    Table b;
    b.meta["format"] = "slowman-frames-1";
    b.meta["order"] = "R S N";
    b.columns = {"xi", "pi", "x", "phi"};
    for (int j = 0; j < n; ++j)
      for (int r = 0; r < n; ++r) b.columns.push_back("W" + std::to_string(j) + "_" + std::to_string(r));
    const UniformGrid1D pg = f.phi_grid();
    for (int xi = 0; xi < f.x_count(); ++xi) {
      const auto& fr = frames_[static_cast<std::size_t>(xi)];
      std::vector<double> row{double(xi), fr.x, fr.period, fr.omega, fr.omega_prime, fr.exponents.lambda};
      for (const auto& mu : fr.exponents.mu) row.insert(row.end(), {mu.real(), mu.imag()});
      for (const Mat* m : {&fr.monodromy, &fr.b, &fr.c})
        for (int r = 0; r < n; ++r)
          for (int c = 0; c < n; ++c) row.push_back((*m)(r, c));
      t.rows.push_back(std::move(row));
      for (int p = 0; p < f.phi_count; ++p) {
        std::vector<double> nr{double(xi), double(p), fr.x, pg.value(p)};
        const Mat w = fr.basis(p);
        for (int j = 0; j < n; ++j)
          for (int r = 0; r < n; ++r) nr.push_back(w(r, j));
        b.rows.push_back(std::move(nr));
      }
    }
    save_table(opt_.out / "floquet.csv", t);
    save_table(opt_.out / "frames.csv", b);
  }

  void write_r1() {
    const auto& f = *family_;
    const auto& c = corrections_.front();
    Table t;
    t.meta["format"] = "slowman-r1-1";
    t.columns = {"x", "r_x", "r_phi"};
    Series s{"r1_x", {}, {}};
    for (int xi = 0; xi < f.x_count(); ++xi) {
      t.add_row({f.x_grid.value(xi), c.r(0, xi), c.r(1, xi)});
      s.x.push_back(f.x_grid.value(xi));
      s.y.push_back(c.r(0, xi));
    }
    save_table(opt_.out / "r1.csv", t);
    write_text(opt_.out / "r1.svg", line_plot({"First-order drift", "x", "r1_x", false, false}, {s}));
  }

  // Pipeline versus the closed-form ellipsoid quantities.
  void oracle_checks() {
    const oracle::EllipsoidParams p{cfg_.params.at("a"), cfg_.params.at("rho")};
    const auto& f = *family_;
    const auto& c = corrections_.front();
    const UniformGrid1D pg = f.phi_grid();
    double r_err = 0.0, g_err = 0.0;
    bool gamma_available = true;
    for (int xi = 0; xi < f.x_count(); ++xi) {
      const double x = f.x_grid.value(xi);
      r_err = std::max(r_err, (c.r.col(xi) - Vec(oracle::r1(p, x))).cwiseAbs().maxCoeff());
      if (!gamma_available) continue;
      try {
        for (int q = 0; q < f.phi_count; ++q)
          g_err = std::max(g_err, (c.gamma[static_cast<std::size_t>(xi)].col(q) - oracle::gamma1(p, x, pg.value(q)))
                                      .cwiseAbs()
                                      .maxCoeff());
      } catch (const UnsupportedConfiguration&) {
        gamma_available = false;
      }
    }
    checks.at_most("verify", "oracle_r1", r_err, 1e-6);
    if (gamma_available) checks.at_most("verify", "oracle_gamma1", g_err, 1e-5);
    summary["oracle"] = {{"r1_error", r_err}, {"gamma1_error", gamma_available ? json(g_err) : json(nullptr)}};
  }
};

}  // namespace

Stage parse_stage(const std::string& name) {
  for (Stage s : {Stage::family, Stage::floquet, Stage::project, Stage::homological, Stage::reduce, Stage::verify})
    if (to_string(s) == name) return s;
  throw ConfigError("unknown subcommand '" + name + "'");
}

std::string to_string(Stage s) {
  switch (s) {
    case Stage::family: return "family";
    case Stage::floquet: return "floquet";
    case Stage::project: return "project";
    case Stage::homological: return "homological";
    case Stage::reduce: return "reduce";
    case Stage::verify: return "verify";
  }
  return "unknown";
}

RunResult run_stage(Stage stage, const RunConfig& config, const RunOptions& options, std::ostream& log) {
  RunResult res;
  res.report = {{"stage", to_string(stage)},
                {"system", config.system},
                {"config_fnv1a", hex(fnv1a(config.canonical()))}};
  std::optional<Pipeline> pipe;
  try {
    fs::create_directories(options.out);
    pipe.emplace(config, options, log);
    pipe->set_requested(stage);
    switch (stage) {
      case Stage::family: pipe->family(); break;
      case Stage::floquet: pipe->frames(); break;
      case Stage::project: pipe->field(); break;
      case Stage::homological: pipe->corrections(); break;
      case Stage::reduce: pipe->run_reduce(); break;
      case Stage::verify:
        pipe->field();
        pipe->corrections();
        pipe->run_verify();
        break;
    }
    res.exit_code = pipe->checks.pass ? exit_pass : exit_tolerance;
    res.report["status"] = pipe->checks.pass ? "pass" : "tolerance_failure";
  } catch (const DependencyError& e) {
    res.exit_code = exit_usage;
    res.report["status"] = "dependency_error";
    res.report["missing_stage"] = to_string(e.stage());
    res.report["error"] = e.what();
  } catch (const ConfigError& e) {
    res.exit_code = exit_usage;
    res.report["status"] = "usage_error";
    res.report["error"] = e.what();
  } catch (const ContinuationStall& e) {
    res.exit_code = exit_numerical;
    res.report["status"] = "numerical_failure";
    res.report["error"] = e.what();
    res.report["last_good_x"] = e.last_good_x();
  } catch (const NumericalError& e) {
    res.exit_code = exit_numerical;
    res.report["status"] = "numerical_failure";
    res.report["error"] = e.what();
  } catch (const std::filesystem::filesystem_error& e) {
    res.exit_code = exit_usage;
    res.report["status"] = "usage_error";
    res.report["error"] = e.what();
  }
  if (pipe) {
    res.report["checks"] = pipe->checks.list;
    res.report["summary"] = pipe->summary;
  }
  if (res.report.contains("error")) log << "error: " << res.report["error"].get<std::string>() << "\n";
  std::error_code ec;
  if (fs::is_directory(options.out, ec)) {
    std::ofstream os(options.out / ("report_" + to_string(stage) + ".json"), std::ios::binary);
    os << res.report.dump(2) << "\n";
  }
  return res;
}

}  // namespace slowman::cli
