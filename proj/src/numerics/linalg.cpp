#include "slowman/numerics/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "slowman/errors.hpp"

namespace slowman {

Eigen::MatrixXd principal_matrix_log(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw ConfigError("matrix log needs a square matrix");
  const Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  if (es.info() != Eigen::Success) throw BranchFailure("eigenvalue computation failed in matrix log");
  const double scale = m.norm();
  for (const auto& lambda : es.eigenvalues()) {
    const double mag = std::abs(lambda);
    if (mag <= std::numeric_limits<double>::min() * std::max(1.0, scale)) {
      throw BranchFailure("matrix log: singular matrix (zero eigenvalue)");
    }
    if (lambda.real() < 0.0 && std::abs(lambda.imag()) <= 1e-12 * mag) {
      std::ostringstream os;
      os << "matrix log: eigenvalue " << lambda.real() << " on the negative real axis";
      throw BranchFailure(os.str());
    }
  }
  Eigen::MatrixXd log_m = m.log();
  if (!log_m.allFinite() || relative_frobenius(log_m.exp(), m) > 1e-10) {
    throw BranchFailure("matrix log: exp(log M) does not reproduce M");
  }
  return log_m;
}

Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& a) { return a.exp(); }

LeastSquaresResult solve_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                       double rank_tol) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  LeastSquaresResult out;
  out.solution = Eigen::VectorXd::Zero(a.cols());
  if (s.size() == 0 || s[0] == 0.0) {
    out.residual_norm = b.norm();
    return out;
  }
  const double cut = rank_tol * s[0];
  const Eigen::VectorXd utb = svd.matrixU().transpose() * b;
  Eigen::VectorXd coeff = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > cut) {
      coeff[i] = utb[i] / s[i];
      ++out.rank;
    }
  }
  out.solution = svd.matrixV() * coeff;
  out.residual_norm = (a * out.solution - b).norm();
  return out;
}

double condition_number(const Eigen::MatrixXd& a) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return std::numeric_limits<double>::infinity();
  const double smin = s[s.size() - 1];
  return smin == 0.0 ? std::numeric_limits<double>::infinity() : s[0] / smin;
}

double relative_frobenius(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(b.norm(), std::numeric_limits<double>::min());
}

}  // namespace slowman
