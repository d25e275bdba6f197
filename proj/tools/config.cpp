#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

#include "slowman/errors.hpp"
#include "slowman/io.hpp"

namespace slowman::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v))
    throw ConfigError("config key '" + key + "': expected a real number, got '" + text + "'");
  return v;
}

int to_int(const std::string& key, const std::string& text) {
  const double v = to_double(key, text);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("config key '" + key + "': expected an integer");
  return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError("config key '" + key + "': expected true or false");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

template <class T>
Setter real(T RunConfig::*m) {
  return [m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = to_double(k, v); };
}
Setter integer(int RunConfig::*m) {
  return [m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = to_int(k, v); };
}
Setter flag(bool RunConfig::*m) {
  return [m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = to_bool(k, v); };
}
Setter list(std::vector<double> RunConfig::*m) {
  return [m](RunConfig& c, const std::string&, const std::string& v) { c.*m = parse_list(v); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> s{
      {"system", [](RunConfig& c, const std::string&, const std::string& v) { c.system = trim(v); }},
      {"x_min", real(&RunConfig::x_min)},
      {"x_max", real(&RunConfig::x_max)},
      {"x_count", integer(&RunConfig::x_count)},
      {"phi_count", integer(&RunConfig::phi_count)},
      {"eps", list(&RunConfig::eps)},
      {"order", integer(&RunConfig::order)},
      {"omit_G2_hessian", flag(&RunConfig::omit_g2_hessian)},
      {"kappa_path", flag(&RunConfig::kappa_path)},
      {"seed_x", real(&RunConfig::seed_x)},
      {"trace_boundaries", flag(&RunConfig::trace_boundaries)},
      {"trace_low", real(&RunConfig::trace_low)},
      {"trace_high", real(&RunConfig::trace_high)},
      {"trace_phi_count", integer(&RunConfig::trace_phi_count)},
      {"shadow_x0", real(&RunConfig::shadow_x0)},
      {"shadow_phi0", real(&RunConfig::shadow_phi0)},
      {"shadow_offset", list(&RunConfig::shadow_offset)},
      {"shadow_c", real(&RunConfig::shadow_c)},
      {"shadow_samples", integer(&RunConfig::shadow_samples)},
      {"reduce_horizon", real(&RunConfig::reduce_horizon)},
      {"tol_family_conjugacy", real(&RunConfig::tol_family_conjugacy)},
      {"tol_decomposition", real(&RunConfig::tol_decomposition)},
      {"tol_projector", real(&RunConfig::tol_projector)},
      {"tol_residual", real(&RunConfig::tol_residual)},
      {"tol_orthogonality", real(&RunConfig::tol_orthogonality)},
      {"tol_fredholm", real(&RunConfig::tol_fredholm)},
      {"ratio_low", real(&RunConfig::ratio_low)},
      {"ratio_high", real(&RunConfig::ratio_high)},
      {"policy",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const auto t = trim(v);
         if (t == "serial") c.policy = ExecutionPolicy::serial;
         else if (t == "parallel") c.policy = ExecutionPolicy::parallel;
         else throw ConfigError("config key '" + k + "': expected serial or parallel");
       }},
  };
  return s;
}

const std::set<std::string>& allowed_params(const std::string& system) {
  static const std::set<std::string> ell{"a", "rho"};
  static const std::set<std::string> mlt{"g_l", "g_k", "g_ca", "v_l", "v_k", "v_ca", "c1",
                                         "c2",  "c3",  "c4",   "tau0", "k"};
  return system == "mlt" ? mlt : ell;
}

// Interval and shadowing defaults depend on the system.
void fill_defaults(RunConfig& c) {
  if (c.system == "ellipsoid") {
    c.params.try_emplace("a", 1.0);
    c.params.try_emplace("rho", 5.0 / 3.0);
    if (c.x_min == 0.0 && c.x_max == 0.0) {
      c.x_min = 0.1 * std::numbers::pi;
      c.x_max = 0.9 * std::numbers::pi;
    }
  } else if (c.system == "mlt") {
    c.params.try_emplace("k", -0.12);
    if (c.x_min == 0.0 && c.x_max == 0.0) {
      c.x_min = 0.077;
      c.x_max = 0.142;
    }
  }
  if (c.seed_x == 0.0) c.seed_x = 0.5 * (c.x_min + c.x_max);
  if (c.shadow_x0 == 0.0) c.shadow_x0 = 0.5 * (c.x_min + c.x_max);
  if (c.shadow_offset.empty()) c.shadow_offset = {1.0, 1.0, 0.0};
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

std::string list_text(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
  return out;
}

}  // namespace

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double("list", item));
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

void RunConfig::validate() const {
  if (system != "ellipsoid" && system != "mlt")
    throw ConfigError("unknown system '" + system + "' (expected ellipsoid or mlt)");
  for (const auto& [key, value] : params)
    if (!allowed_params(system).count(key)) throw ConfigError("unknown parameter 'param." + key + "' for " + system);
  if (!(x_max > x_min)) throw ConfigError("x interval is degenerate");
  if (system == "ellipsoid" && !(x_min > 0.0 && x_max < std::numbers::pi))
    throw ConfigError("ellipsoid x interval must lie inside (0, pi)");
  if (x_count < 33 || phi_count < 33 || trace_phi_count < 33) throw ConfigError("grid sizes must be at least 33");
  if (system == "ellipsoid") {
    // the layer field is singular on the equator
    const double h = (x_max - x_min) / (x_count - 1);
    const double k = (std::numbers::pi / 2 - x_min) / h;
    if (k >= -1e-9 && k <= x_count - 1 + 1e-9 && std::abs(k - std::round(k)) < 1e-6)
      throw ConfigError("an x-grid node falls on the equator x = pi/2, where the ellipsoid layer field is singular");
  }
  if (eps.empty()) throw ConfigError("eps list is empty");
  for (double e : eps)
    if (!(e > 0.0 && e <= 0.2)) throw ConfigError("eps values must lie in (0, 0.2]");
  if (order < 1 || order > 2) throw ConfigError("order must be 1 or 2");
  if (!(seed_x >= x_min && seed_x <= x_max)) throw ConfigError("seed_x outside the x interval");
  if (!(shadow_x0 >= x_min && shadow_x0 <= x_max)) throw ConfigError("shadow_x0 outside the x interval");
  if (shadow_offset.size() != 3) throw ConfigError("shadow_offset needs three components");
  double norm = 0.0;
  for (double v : shadow_offset) norm += v * v;
  if (!(norm > 0.0)) throw ConfigError("shadow_offset is zero");
  if (!(shadow_c > 0.0) || !(reduce_horizon > 0.0)) throw ConfigError("horizon constants must be positive");
  if (shadow_samples < 3) throw ConfigError("shadow_samples must be at least 3");
  if (!(ratio_high > ratio_low)) throw ConfigError("ratio band is empty");
  if (system == "ellipsoid" && kappa_path)
    throw ConfigError("kappa_path needs a standard-form system (mlt)");
}

std::string RunConfig::family_key() const {
  std::ostringstream os;
  os << "system=" << system << "\n";
  for (const auto& [k, v] : params) os << "param." << k << "=" << format_double(v) << "\n";
  os << "x_min=" << format_double(x_min) << "\nx_max=" << format_double(x_max) << "\nx_count=" << x_count
     << "\nphi_count=" << phi_count << "\nseed_x=" << format_double(seed_x) << "\n";
  return os.str();
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  os << family_key() << "eps=" << list_text(eps) << "\norder=" << order
     << "\nomit_G2_hessian=" << bool_text(omit_g2_hessian) << "\nkappa_path=" << bool_text(kappa_path)
     << "\ntrace_boundaries=" << bool_text(trace_boundaries) << "\ntrace_low=" << format_double(trace_low)
     << "\ntrace_high=" << format_double(trace_high) << "\ntrace_phi_count=" << trace_phi_count
     << "\nshadow_x0=" << format_double(shadow_x0) << "\nshadow_phi0=" << format_double(shadow_phi0)
     << "\nshadow_offset=" << list_text(shadow_offset) << "\nshadow_c=" << format_double(shadow_c)
     << "\nshadow_samples=" << shadow_samples << "\nreduce_horizon=" << format_double(reduce_horizon)
     << "\ntol_family_conjugacy=" << format_double(tol_family_conjugacy)
     << "\ntol_decomposition=" << format_double(tol_decomposition)
     << "\ntol_projector=" << format_double(tol_projector) << "\ntol_residual=" << format_double(tol_residual)
     << "\ntol_orthogonality=" << format_double(tol_orthogonality)
     << "\ntol_fredholm=" << format_double(tol_fredholm) << "\nratio_low=" << format_double(ratio_low)
     << "\nratio_high=" << format_double(ratio_high) << "\n";
  return os.str();
}

RunConfig parse_config(std::istream& is) {
  RunConfig c;
  std::string line;
  int number = 0;
  std::set<std::string> seen;
  while (std::getline(is, line)) {
    ++number;
    const auto hash = line.find('#');
    const std::string body = trim(line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError("config key '" + key + "' given twice");
    if (key.rfind("param.", 0) == 0 && key.size() > 6) {
      c.params[key.substr(6)] = to_double(key, value);
      continue;
    }
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("config line " + std::to_string(number) + ": unknown key '" + key + "'");
    it->second(c, key, value);
  }
  fill_defaults(c);
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

}  // namespace slowman::cli
