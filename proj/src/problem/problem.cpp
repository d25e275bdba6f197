#include "slowman/problem.hpp"

#include "slowman/errors.hpp"

namespace slowman {

void ProblemSpec::validate() const {
  if (n <= 0) throw ConfigError(name + ": dimension must be positive");
  if (!(k >= 1 && k < n - 1)) throw ConfigError(name + ": need 1 <= k < n-1");
  if (terms.size() < 2) throw ConfigError(name + ": need at least F0 and F1");
  for (const auto& t : terms) {
    if (!t.eval || !t.jacobian) throw ConfigError(name + ": every term needs eval and jacobian");
  }
}

double ProblemSpec::param(const std::string& key) const {
  const auto it = params.find(key);
  if (it == params.end()) throw ConfigError(name + ": unknown parameter '" + key + "'");
  return it->second;
}

Vec eval_series(const ProblemSpec& spec, const Vec& z, double eps) {
  const int m = spec.order();
  Vec acc = spec.terms[static_cast<std::size_t>(m)].eval(z);
  for (int i = m - 1; i >= 0; --i) acc = spec.terms[static_cast<std::size_t>(i)].eval(z) + eps * acc;
  return acc;
}

Mat jacobian_series(const ProblemSpec& spec, const Vec& z, double eps) {
  const int m = spec.order();
  Mat acc = spec.terms[static_cast<std::size_t>(m)].jacobian(z);
  for (int i = m - 1; i >= 0; --i) acc = spec.terms[static_cast<std::size_t>(i)].jacobian(z) + eps * acc;
  return acc;
}

Mat finite_difference_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& z, double step) {
  const Vec f0 = f(z);
  Mat jac(f0.size(), z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    Vec zp = z;
    Vec zm = z;
    const double h = step * std::max(1.0, std::abs(z[j]));
    zp[j] += h;
    zm[j] -= h;
    jac.col(j) = (f(zp) - f(zm)) / (2.0 * h);
  }
  return jac;
}

}  // namespace slowman
