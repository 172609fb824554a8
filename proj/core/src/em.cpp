#include "regem/em.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "regem/errors.hpp"

namespace regem {

namespace {

struct EmContext {
  Eigen::MatrixXd X;       // n x k full design, intercept first
  Eigen::VectorXd y;       // zero-filled response
  std::vector<Eigen::Index> obs_rows, mis_rows;
};

EmContext make_context(const Dataset& d, const std::string& response,
                       const std::vector<std::string>& predictors) {
  d.check();
  const Eigen::Index yc = d.column(response);
  std::vector<Eigen::Index> pred_cols;
  for (const auto& name : predictors) {
    if (name == response)
      throw ConfigError("response '" + response + "' listed as a predictor");
    const Eigen::Index j = d.column(name);
    if (!d.missing_rows(j).empty())
      throw ConfigError("predictor '" + name +
                        "' has missing cells; the EM loop requires "
                        "missingness confined to the response");
    pred_cols.push_back(j);
  }

  EmContext ctx;
  const Eigen::Index n = d.rows();
  ctx.X.resize(n, 1 + static_cast<Eigen::Index>(pred_cols.size()));
  ctx.y.setZero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ctx.X(i, 0) = 1.0;
    for (size_t c = 0; c < pred_cols.size(); ++c)
      ctx.X(i, 1 + static_cast<Eigen::Index>(c)) = d.values(i, pred_cols[c]);
    if (d.mask(i, yc))
      ctx.y(i) = d.values(i, yc);
  }
  ctx.obs_rows = d.observed_rows(yc);
  ctx.mis_rows = d.missing_rows(yc);
  return ctx;
}

// coefficient change with a relative fallback for large magnitudes
double coef_delta(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    const double scale = std::max(1.0, std::max(std::abs(a(j)), std::abs(b(j))));
    worst = std::max(worst, std::abs(a(j) - b(j)) / scale);
  }
  return worst;
}

// completed-data SSE at b with the missing rows filled by b's own
// predictions, i.e. the observed-row SSE
double self_filled_sse(const EmContext& ctx, const Eigen::VectorXd& b) {
  double sse = 0.0;
  for (auto i : ctx.obs_rows) {
    const double r = ctx.y(i) - ctx.X.row(i).dot(b);
    sse += r * r;
  }
  return sse;
}

double profiled_neg2ll(double sse, Eigen::Index n) {
  if (sse <= 0.0) return -std::numeric_limits<double>::infinity();
  const double nn = static_cast<double>(n);
  return nn * std::log(2.0 * std::numbers::pi) + nn * std::log(sse / nn) + nn;
}

Eigen::VectorXd imputations_at(const EmContext& ctx, const Eigen::VectorXd& b) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(ctx.mis_rows.size()));
  for (size_t m = 0; m < ctx.mis_rows.size(); ++m)
    out(static_cast<Eigen::Index>(m)) = ctx.X.row(ctx.mis_rows[m]).dot(b);
  return out;
}

Eigen::VectorXd refit(const EmContext& ctx, const Eigen::VectorXd& b) {
  Eigen::VectorXd y_completed = ctx.y;
  for (auto i : ctx.mis_rows) y_completed(i) = ctx.X.row(i).dot(b);
  return fit_ols(ctx.X, y_completed).coefficients;
}

}  // namespace

OlsFit em_step(const Dataset& d, const std::string& response,
               const std::vector<std::string>& predictors,
               const Eigen::VectorXd& coefficients) {
  const EmContext ctx = make_context(d, response, predictors);
  if (coefficients.size() != ctx.X.cols())
    throw ConfigError("coefficient vector has wrong length");
  Eigen::VectorXd y_completed = ctx.y;
  for (auto i : ctx.mis_rows) y_completed(i) = ctx.X.row(i).dot(coefficients);
  return fit_ols(ctx.X, y_completed);
}

EmResult run_em(const Dataset& d, const std::string& response,
                const std::vector<std::string>& predictors,
                const EmOptions& opts) {
  const EmContext ctx = make_context(d, response, predictors);
  const Eigen::Index n = d.rows();

  // complete-case fit: the limit, and the source of the imputation SEs
  Eigen::MatrixXd X_obs(static_cast<Eigen::Index>(ctx.obs_rows.size()), ctx.X.cols());
  Eigen::VectorXd y_obs(static_cast<Eigen::Index>(ctx.obs_rows.size()));
  for (size_t r = 0; r < ctx.obs_rows.size(); ++r) {
    X_obs.row(static_cast<Eigen::Index>(r)) = ctx.X.row(ctx.obs_rows[r]);
    y_obs(static_cast<Eigen::Index>(r)) = ctx.y(ctx.obs_rows[r]);
  }
  const OlsFit cc_fit = fit_ols(X_obs, y_obs);

  Eigen::VectorXd b = cc_fit.coefficients;
  if (opts.init) {
    if (opts.init->size() != ctx.X.cols())
      throw ConfigError("init vector has wrong length");
    b = *opts.init;
  }

  EmResult result;
  auto push = [&](int tau, const Eigen::VectorXd& bt) {
    EmIteration it;
    it.tau = tau;
    it.coefficients = bt;
    it.imputations = imputations_at(ctx, bt);
    it.sse = self_filled_sse(ctx, bt);
    it.neg2ll = profiled_neg2ll(it.sse, n);
    result.trace.iterations.push_back(std::move(it));
  };

  push(0, b);
  result.trace.converged = false;
  result.trace.final_tau = 0;
  if (ctx.mis_rows.empty()) {
    result.trace.converged = true;
  } else {
    for (int tau = 0; tau < opts.max_iter; ++tau) {
      const Eigen::VectorXd b_next = refit(ctx, b);
      if (coef_delta(b_next, b) < opts.tol) {
        result.trace.converged = true;
        result.trace.final_tau = tau;
        break;
      }
      b = b_next;
      push(tau + 1, b);
      result.trace.final_tau = tau + 1;
    }
  }

  result.fit = cc_fit;
  const Eigen::VectorXd fills = imputations_at(ctx, b);
  for (size_t m = 0; m < ctx.mis_rows.size(); ++m) {
    ImputationCell cell;
    cell.row = ctx.mis_rows[m];
    cell.variable = response;
    cell.point = fills(static_cast<Eigen::Index>(m));
    const Eigen::VectorXd x0 = ctx.X.row(ctx.mis_rows[m]);
    cell.se = prediction_se(cc_fit.sigma2_hat, leverage(cc_fit, x0));
    result.imputations.cells.push_back(std::move(cell));
  }
  result.imputations.fit = cc_fit;
  return result;
}

void write_trace_csv(const EmTrace& trace, std::ostream& out) {
  const Eigen::Index k =
      trace.iterations.empty() ? 0 : trace.iterations.front().coefficients.size();
  out << "tau";
  for (Eigen::Index j = 0; j < k; ++j) out << ",b" << j;
  out << ",sse,neg2ll\n";
  std::ostringstream line;
  line.precision(17);
  for (const auto& it : trace.iterations) {
    line.str("");
    line << it.tau;
    for (Eigen::Index j = 0; j < k; ++j) line << "," << it.coefficients(j);
    line << "," << it.sse << "," << it.neg2ll;
    out << line.str() << "\n";
  }
}

}  // namespace regem
