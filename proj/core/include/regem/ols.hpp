#pragma once

#include <Eigen/Dense>

namespace regem {

// Complete-case ordinary least squares fit. The prediction machinery below
// (point prediction, leverage, prediction standard error) is what the
// closed-form imputation reduces to.
struct OlsFit {
  Eigen::VectorXd coefficients;  // intercept first, then slopes
  Eigen::MatrixXd xtx_inv;       // (X^T X)^{-1}, k x k
  double sse = 0.0;              // sum of squared residuals
  double sigma2_hat = 0.0;       // sse / (n - k), unbiased divisor
  Eigen::Index df = 0;           // n - k

  Eigen::Index k() const { return coefficients.size(); }
};

// Solves the normal equations for a design X (intercept column included by
// the caller) and response y. Uses a pivoted LDLT of X^T X; a pivot below
// 1e-12 times the largest pivot, or n <= k, raises SingularError.
OlsFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// Point predictions X_new * b for new design rows.
Eigen::VectorXd predict_new(const OlsFit& fit, const Eigen::MatrixXd& X_new);

// x0^T (X^T X)^{-1} x0, the model-space distance of a prediction point
// from the observed design.
double leverage(const OlsFit& fit, const Eigen::VectorXd& x0);

// sqrt(sigma2 * (1 + h)): the standard error for predicting a new
// observation at leverage h, which is also the imputation standard error.
double prediction_se(double sigma2_hat, double h);

// -2 log L for the Gaussian linear model at (b, sigma2):
//   n log(2 pi) + n log(sigma2) + SSE / sigma2.
double neg2_loglik(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                   const Eigen::VectorXd& b, double sigma2);

}  // namespace regem
