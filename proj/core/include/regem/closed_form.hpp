#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "regem/dataset.hpp"
#include "regem/ols.hpp"

namespace regem {

// One imputed cell. `row` is the 0-based observation index; serializers
// add 1 when writing reports.
struct ImputationCell {
  Eigen::Index row = 0;
  std::string variable;
  double point = 0.0;
  double se = 0.0;
  std::optional<std::string> error;  // set when this cell could not be estimated
};

struct ImputationSet {
  std::vector<ImputationCell> cells;
  OlsFit fit;        // the complete-case fit the estimates derive from
  std::string note;  // estimator caveat propagated into reports, may be empty

  const ImputationCell* find(const std::string& variable, Eigen::Index row) const;
};

// The indicator-variable regression system: response zero-filled at missing
// rows, design [intercept | covariates | -I indicator block] with one
// -1 column per missing cell.
struct AncovaSystem {
  Eigen::VectorXd response;            // length n, 0 at missing rows
  Eigen::MatrixXd design;              // n x (1 + k_pred + n_m)
  std::vector<Eigen::Index> missing_rows;  // column order of the indicator block
  Eigen::Index k_pred = 0;

  Eigen::Index n() const { return response.size(); }
  Eigen::Index n_missing() const { return static_cast<Eigen::Index>(missing_rows.size()); }
  Eigen::Index k() const { return 1 + k_pred; }
};

// Builds the indicator system for a response with missing cells and fully
// observed predictors. A missing predictor cell is an error directing the
// caller to the concatenated solver.
AncovaSystem build_ancova(const Dataset& d, const std::string& response,
                          const std::vector<std::string>& predictors);

// Closed-form imputation: complete-case fit, point = x_m^T b, standard
// error = sqrt(sigma2 * (1 + leverage)). Equivalent to solving the full
// augmented system; the fast path of that identity.
ImputationSet impute_closed_form(const Dataset& d, const std::string& response,
                                 const std::vector<std::string>& predictors);

// Direct solve of the augmented normal equations, no partitioned shortcut.
// Returns the covariate coefficients, the indicator coefficients (the
// imputations) and their standard errors from the inverse augmented normal
// matrix. Exists as the independent cross-check for impute_closed_form.
struct AugmentedSolution {
  Eigen::VectorXd b_covariates;
  Eigen::VectorXd b_missing;
  Eigen::VectorXd se_missing;
  double sse = 0.0;
  double sigma2_hat = 0.0;
  Eigen::Index df = 0;
};
AugmentedSolution solve_augmented_ols(const AncovaSystem& sys);

// Summary moments for the monotone bivariate case: X fully observed on n
// rows, Y observed on the first n_obs of them. The s_* entries are sums of
// squares/products about the observed-case means; mean_sq_x_all is the
// second central moment of all n X values (already divided by n).
struct MonotoneMoments {
  Eigen::Index n = 0;
  Eigen::Index n_obs = 0;
  double sum_x_all = 0.0;
  double mean_sq_x_all = 0.0;
  double sum_x_obs = 0.0;
  double sum_y_obs = 0.0;
  double s_xx_obs = 0.0;
  double s_yy_obs = 0.0;
  double s_xy_obs = 0.0;
};

struct MonotoneMle {
  double mu2_hat = 0.0;      // ML mean of Y over all n rows
  double sigma22_hat = 0.0;  // ML variance of Y
  double slope = 0.0;        // b = s_xy / s_xx
  double intercept = 0.0;
};

// Explicit ML formulas for the monotone bivariate pattern:
//   mu2 = ybar_obs + b (xbar_all - xbar_obs)
//   sigma22 = s_yy/n_obs + b^2 (mean_sq_x_all - s_xx/n_obs)
MonotoneMle monotone_bivariate_mle(const MonotoneMoments& m);

// Completed-data ML cross covariance: observed cross products recentered at
// the ML means plus the contribution of the imputed rows, divided by n.
// x_missing holds the X values of the rows with missing Y.
double monotone_bivariate_cov(const MonotoneMoments& m,
                              const std::vector<double>& x_missing);

}  // namespace regem
