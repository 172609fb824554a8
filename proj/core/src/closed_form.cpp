#include "regem/closed_form.hpp"

#include <cmath>

#include "regem/errors.hpp"

namespace regem {

const ImputationCell* ImputationSet::find(const std::string& variable,
                                          Eigen::Index row) const {
  for (const auto& c : cells)
    if (c.variable == variable && c.row == row) return &c;
  return nullptr;
}

namespace {

// Design rows [1 | predictors] for the given observation rows.
Eigen::MatrixXd design_for_rows(const Dataset& d,
                                const std::vector<Eigen::Index>& rows,
                                const std::vector<Eigen::Index>& pred_cols) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()),
                    1 + static_cast<Eigen::Index>(pred_cols.size()));
  for (size_t r = 0; r < rows.size(); ++r) {
    X(static_cast<Eigen::Index>(r), 0) = 1.0;
    for (size_t c = 0; c < pred_cols.size(); ++c)
      X(static_cast<Eigen::Index>(r), 1 + static_cast<Eigen::Index>(c)) =
          d.values(rows[r], pred_cols[c]);
  }
  return X;
}

std::vector<Eigen::Index> resolve_predictors(
    const Dataset& d, const std::string& response,
    const std::vector<std::string>& predictors) {
  std::vector<Eigen::Index> cols;
  for (const auto& name : predictors) {
    if (name == response)
      throw ConfigError("response '" + response + "' listed as a predictor");
    cols.push_back(d.column(name));
  }
  return cols;
}

}  // namespace

AncovaSystem build_ancova(const Dataset& d, const std::string& response,
                          const std::vector<std::string>& predictors) {
  d.check();
  const Eigen::Index yc = d.column(response);
  const auto pred_cols = resolve_predictors(d, response, predictors);
  for (auto j : pred_cols)
    if (Eigen::Index bad = static_cast<Eigen::Index>(d.missing_rows(j).size()); bad > 0)
      throw ConfigError("predictor '" + d.names[static_cast<size_t>(j)] +
                        "' has " + std::to_string(bad) +
                        " missing cells; use the concatenated solver for "
                        "missingness outside the response");

  AncovaSystem sys;
  sys.missing_rows = d.missing_rows(yc);
  sys.k_pred = static_cast<Eigen::Index>(pred_cols.size());
  const Eigen::Index n = d.rows(), nm = sys.n_missing();

  sys.response.setZero(n);
  for (Eigen::Index i = 0; i < n; ++i)
    if (d.mask(i, yc)) sys.response(i) = d.values(i, yc);

  sys.design.setZero(n, 1 + sys.k_pred + nm);
  for (Eigen::Index i = 0; i < n; ++i) {
    sys.design(i, 0) = 1.0;
    for (Eigen::Index c = 0; c < sys.k_pred; ++c)
      sys.design(i, 1 + c) = d.values(i, pred_cols[static_cast<size_t>(c)]);
  }
  for (Eigen::Index m = 0; m < nm; ++m)
    sys.design(sys.missing_rows[static_cast<size_t>(m)], 1 + sys.k_pred + m) = -1.0;
  return sys;
}

ImputationSet impute_closed_form(const Dataset& d, const std::string& response,
                                 const std::vector<std::string>& predictors) {
  d.check();
  const Eigen::Index yc = d.column(response);
  const auto pred_cols = resolve_predictors(d, response, predictors);
  for (auto j : pred_cols)
    if (!d.missing_rows(j).empty())
      throw ConfigError("predictor '" + d.names[static_cast<size_t>(j)] +
                        "' has missing cells; use the concatenated solver "
                        "for missingness outside the response");

  const auto obs_rows = d.observed_rows(yc);
  const auto mis_rows = d.missing_rows(yc);

  Eigen::VectorXd y_obs(static_cast<Eigen::Index>(obs_rows.size()));
  for (size_t r = 0; r < obs_rows.size(); ++r)
    y_obs(static_cast<Eigen::Index>(r)) = d.values(obs_rows[r], yc);

  ImputationSet out;
  out.fit = fit_ols(design_for_rows(d, obs_rows, pred_cols), y_obs);

  const Eigen::MatrixXd X_mis = design_for_rows(d, mis_rows, pred_cols);
  for (size_t m = 0; m < mis_rows.size(); ++m) {
    const Eigen::VectorXd x0 = X_mis.row(static_cast<Eigen::Index>(m));
    ImputationCell cell;
    cell.row = mis_rows[m];
    cell.variable = response;
    cell.point = x0.dot(out.fit.coefficients);
    cell.se = prediction_se(out.fit.sigma2_hat, leverage(out.fit, x0));
    out.cells.push_back(std::move(cell));
  }
  return out;
}

AugmentedSolution solve_augmented_ols(const AncovaSystem& sys) {
  const Eigen::Index n = sys.n(), k = sys.k(), nm = sys.n_missing();
  const Eigen::Index q = k + nm;
  if (n <= q)
    throw SingularError(
        "augmented system has " + std::to_string(n) + " rows for " +
        std::to_string(q) + " parameters; nothing is estimable");

  // Deliberately a different route from the prediction formulas: full QR of
  // the augmented design, inverse normal matrix for the standard errors.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sys.design);
  if (qr.rank() < q) throw SingularError("augmented design is rank deficient");
  const Eigen::VectorXd beta = qr.solve(sys.response);

  AugmentedSolution sol;
  sol.b_covariates = beta.head(k);
  sol.b_missing = beta.tail(nm);
  sol.sse = (sys.response - sys.design * beta).squaredNorm();
  sol.df = n - q;
  sol.sigma2_hat = sol.sse / static_cast<double>(sol.df);

  const Eigen::MatrixXd inv_normal =
      (sys.design.transpose() * sys.design)
          .fullPivLu()
          .solve(Eigen::MatrixXd::Identity(q, q));
  sol.se_missing.resize(nm);
  for (Eigen::Index m = 0; m < nm; ++m)
    sol.se_missing(m) = std::sqrt(sol.sigma2_hat * inv_normal(k + m, k + m));
  return sol;
}

MonotoneMle monotone_bivariate_mle(const MonotoneMoments& m) {
  if (m.n_obs < 2) throw ConfigError("need at least two complete pairs");
  if (m.n < m.n_obs) throw ConfigError("n must be >= n_obs");
  if (!(m.s_xx_obs > 0.0)) throw ConfigError("degenerate X: s_xx must be positive");

  const double n = static_cast<double>(m.n);
  const double no = static_cast<double>(m.n_obs);
  MonotoneMle out;
  out.slope = m.s_xy_obs / m.s_xx_obs;
  const double xbar_obs = m.sum_x_obs / no;
  const double ybar_obs = m.sum_y_obs / no;
  out.intercept = ybar_obs - out.slope * xbar_obs;
  out.mu2_hat = ybar_obs + out.slope * (m.sum_x_all / n - xbar_obs);
  out.sigma22_hat =
      m.s_yy_obs / no +
      out.slope * out.slope * (m.mean_sq_x_all - m.s_xx_obs / no);
  return out;
}

double monotone_bivariate_cov(const MonotoneMoments& m,
                              const std::vector<double>& x_missing) {
  if (static_cast<Eigen::Index>(x_missing.size()) != m.n - m.n_obs)
    throw ConfigError("x_missing size must equal n - n_obs");
  const MonotoneMle mle = monotone_bivariate_mle(m);
  const double n = static_cast<double>(m.n);
  const double no = static_cast<double>(m.n_obs);
  const double mu1 = m.sum_x_all / n;
  const double xbar_obs = m.sum_x_obs / no;
  const double ybar_obs = m.sum_y_obs / no;

  // observed cross products recentred from the observed-case means to the
  // ML means, then the imputed rows' contribution
  double cross = m.s_xy_obs + no * (xbar_obs - mu1) * (ybar_obs - mle.mu2_hat);
  for (double x : x_missing) {
    const double yhat = mle.intercept + mle.slope * x;
    cross += (x - mu1) * (yhat - mle.mu2_hat);
  }
  return cross / n;
}

}  // namespace regem
