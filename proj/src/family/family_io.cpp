#include <istream>
#include <sstream>
#include <numbers>
#include <ostream>
#include <string>

#include "slowman/errors.hpp"
#include "slowman/io.hpp"
#include "slowman/orbit_family.hpp"

namespace slowman {

// One row per (x, phi) node: indices, coordinates, gamma0, Phi (row-major), tau.
void write_family(std::ostream& os, const OrbitFamily& family) {
  Table t;
  t.meta["format"] = "slowman-family-1";
  t.meta["n"] = std::to_string(family.n);
  t.meta["k"] = std::to_string(family.k);
  t.meta["x_grid"] = format_double(family.x_grid.start()) + ' ' + format_double(family.x_grid.end()) + ' ' +
                     std::to_string(family.x_grid.count());
  t.meta["phi_count"] = std::to_string(family.phi_count);
  t.columns = {"xi", "pi", "x", "phi"};
  for (int i = 0; i < family.n; ++i) t.columns.push_back("gamma0_" + std::to_string(i));
  for (int r = 0; r < family.n; ++r)
    for (int c = 0; c < family.n; ++c) t.columns.push_back("Phi_" + std::to_string(r) + std::to_string(c));
  t.columns.push_back("tau");
  const UniformGrid1D pg = family.phi_grid();
  for (int xi = 0; xi < family.x_count(); ++xi) {
    for (int p = 0; p < family.phi_count; ++p) {
      std::vector<double> row{double(xi), double(p), family.x_grid.value(xi), pg.value(p)};
      const auto& g = family.gamma0[static_cast<std::size_t>(xi)];
      for (int i = 0; i < family.n; ++i) row.push_back(g(i, p));
      const Mat& m = family.transition[static_cast<std::size_t>(xi)][static_cast<std::size_t>(p)];
      for (int r = 0; r < family.n; ++r)
        for (int c = 0; c < family.n; ++c) row.push_back(m(r, c));
      row.push_back(family.tau.samples(0, xi));
      t.rows.push_back(std::move(row));
    }
  }
  write_table(os, t);
}

OrbitFamily read_family(std::istream& is) {
  const Table t = read_table(is);
  auto meta = [&](const std::string& key) {
    auto it = t.meta.find(key);
    if (it == t.meta.end()) throw ConfigError("family file: missing '" + key + "'");
    return it->second;
  };
  if (meta("format") != "slowman-family-1") throw ConfigError("family file: unknown format");
  OrbitFamily f;
  f.n = std::stoi(meta("n"));
  f.k = std::stoi(meta("k"));
  f.phi_count = std::stoi(meta("phi_count"));
  {
    std::istringstream gs(meta("x_grid"));
    double a = 0, b = 0;
    int c = 0;
    gs >> a >> b >> c;
    f.x_grid = UniformGrid1D(a, b, c);
  }
  const int n = f.n;
  const auto expected_rows = static_cast<std::size_t>(f.x_count()) * static_cast<std::size_t>(f.phi_count);
  if (t.rows.size() != expected_rows || t.columns.size() != static_cast<std::size_t>(5 + n + n * n))
    throw ConfigError("family file: table shape does not match its header");
  f.gamma0.assign(static_cast<std::size_t>(f.x_count()), Mat(n, f.phi_count));
  f.transition.assign(static_cast<std::size_t>(f.x_count()), std::vector<Mat>(static_cast<std::size_t>(f.phi_count)));
  Mat tau(1, f.x_count());
  for (const auto& row : t.rows) {
    const int xi = static_cast<int>(row[0]);
    const int p = static_cast<int>(row[1]);
    if (xi < 0 || xi >= f.x_count() || p < 0 || p >= f.phi_count) throw ConfigError("family file: index out of range");
    for (int i = 0; i < n; ++i) f.gamma0[static_cast<std::size_t>(xi)](i, p) = row[static_cast<std::size_t>(4 + i)];
    Mat m(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m(r, c) = row[static_cast<std::size_t>(4 + n + r * n + c)];
    f.transition[static_cast<std::size_t>(xi)][static_cast<std::size_t>(p)] = std::move(m);
    tau(0, xi) = row.back();
  }
  f.tau = SampledCurve(f.x_grid, tau);
  f.omega = SampledCurve(f.x_grid, (2.0 * std::numbers::pi / tau.array()).matrix());
  return f;
}

}  // namespace slowman
