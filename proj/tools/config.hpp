#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "slowman/parallel.hpp"

namespace slowman::cli {

/// Everything a run needs. Loaded from `key = value` lines; see README.
struct RunConfig {
  std::string system = "ellipsoid";      // ellipsoid | mlt
  std::map<std::string, double> params;  // a, rho / MLT parameters incl. k
  double x_min = 0.0;
  double x_max = 0.0;
  int x_count = 64;
  int phi_count = 256;
  std::vector<double> eps{0.02, 0.01, 0.005};
  int order = 1;
  bool omit_g2_hessian = false;
  bool kappa_path = false;

  // family
  double seed_x = 0.0;       // MLT seed orbit; 0 picks the interval midpoint
  bool trace_boundaries = true;
  double trace_low = 0.07;   // continuation targets beyond the interval
  double trace_high = 0.16;
  int trace_phi_count = 128;

  // shadowing
  double shadow_x0 = 0.0;    // 0 picks the interval midpoint
  double shadow_phi0 = 0.0;
  std::vector<double> shadow_offset;  // normalised before use; empty means (1, 1, 0)
  double shadow_c = 1.0;
  int shadow_samples = 2001;
  double reduce_horizon = 1.0;  // reduced trajectories run to reduce_horizon / eps

  // tolerances
  double tol_family_conjugacy = 1e-6;
  double tol_decomposition = 1e-6;
  double tol_projector = 1e-9;
  double tol_residual = 1e-5;
  double tol_orthogonality = 1e-7;
  double tol_fredholm = 1e-8;
  double ratio_low = 1.6;
  double ratio_high = 2.6;

  ExecutionPolicy policy = ExecutionPolicy::parallel;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
  /// Canonical `key=value` lines, sorted; the basis of artifact hashes.
  [[nodiscard]] std::string canonical() const;
  /// Canonical text restricted to what the family stage depends on.
  [[nodiscard]] std::string family_key() const;
};

/// Parses and validates. Unknown keys and malformed values raise ConfigError.
[[nodiscard]] RunConfig parse_config(std::istream& is);
[[nodiscard]] RunConfig load_config(const std::string& path);
/// Comma-separated list of reals.
[[nodiscard]] std::vector<double> parse_list(const std::string& text);

}  // namespace slowman::cli
