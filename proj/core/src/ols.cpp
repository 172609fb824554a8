#include "regem/ols.hpp"

#include <cmath>
#include <numbers>

#include "regem/errors.hpp"

namespace regem {

OlsFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Eigen::Index n = X.rows(), k = X.cols();
  if (y.size() != n) throw ConfigError("design and response row counts differ");
  if (n <= k)
    throw SingularError(
        "only " + std::to_string(n) + " rows for " + std::to_string(k) +
        " coefficients: the normal matrix is singular and not all parametric "
        "functions are estimable");

  const Eigen::MatrixXd xtx = X.transpose() * X;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  const Eigen::VectorXd pivots = ldlt.vectorD();
  const double max_pivot = pivots.cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || max_pivot <= 0.0 ||
      pivots.minCoeff() < 1e-12 * max_pivot)
    throw SingularError(
        "rank-deficient design: the normal matrix is singular and not all "
        "parametric functions are estimable");

  OlsFit fit;
  fit.coefficients = ldlt.solve(X.transpose() * y);
  fit.xtx_inv = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
  // enforce exact symmetry lost to rounding in the triangular solves
  fit.xtx_inv = ((fit.xtx_inv + fit.xtx_inv.transpose()) / 2.0).eval();
  const Eigen::VectorXd resid = y - X * fit.coefficients;
  fit.sse = resid.squaredNorm();
  fit.df = n - k;
  fit.sigma2_hat = fit.sse / static_cast<double>(fit.df);
  return fit;
}

Eigen::VectorXd predict_new(const OlsFit& fit, const Eigen::MatrixXd& X_new) {
  if (X_new.cols() != fit.k())
    throw ConfigError("prediction design has " + std::to_string(X_new.cols()) +
                      " columns, fit has " + std::to_string(fit.k()) +
                      " coefficients");
  return X_new * fit.coefficients;
}

double leverage(const OlsFit& fit, const Eigen::VectorXd& x0) {
  if (x0.size() != fit.k())
    throw ConfigError("leverage point has " + std::to_string(x0.size()) +
                      " entries, fit has " + std::to_string(fit.k()) +
                      " coefficients");
  return x0.dot(fit.xtx_inv * x0);
}

double prediction_se(double sigma2_hat, double h) {
  if (sigma2_hat < 0.0) throw ConfigError("negative residual variance");
  if (h < 0.0) throw ConfigError("negative leverage");
  return std::sqrt(sigma2_hat * (1.0 + h));
}

double neg2_loglik(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                   const Eigen::VectorXd& b, double sigma2) {
  if (sigma2 <= 0.0) throw ConfigError("sigma2 must be positive");
  if (X.rows() != y.size() || X.cols() != b.size())
    throw ConfigError("dimension mismatch in neg2_loglik");
  const double n = static_cast<double>(y.size());
  const double sse = (y - X * b).squaredNorm();
  return n * std::log(2.0 * std::numbers::pi) + n * std::log(sigma2) +
         sse / sigma2;
}

}  // namespace regem
