#include "regem/nls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "nls_internal.hpp"
#include "regem/errors.hpp"
#include "regem/ols.hpp"

namespace regem {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<Eigen::Index> block_predictors(const ConcatenatedSystem& sys,
                                           Eigen::Index response_var) {
  std::vector<Eigen::Index> preds;
  for (Eigen::Index u = 0; u < sys.p(); ++u)
    if (u != response_var) preds.push_back(u);
  return preds;
}

}  // namespace

Eigen::Index ConcatenatedSystem::cell_index(Eigen::Index variable,
                                            Eigen::Index row) const {
  const CellRef key{variable, row};
  auto it = std::lower_bound(cells.begin(), cells.end(), key,
                             [](const CellRef& a, const CellRef& b) {
                               return std::tie(a.variable, a.row) <
                                      std::tie(b.variable, b.row);
                             });
  if (it == cells.end() || !(*it == key)) return -1;
  return static_cast<Eigen::Index>(it - cells.begin());
}

Eigen::VectorXd ConcatenatedSystem::stacked_response() const {
  Eigen::VectorXd y(stacked_rows());
  for (Eigen::Index b = 0; b < blocks(); ++b) {
    const Eigen::Index v = equation_vars[static_cast<size_t>(b)];
    for (Eigen::Index i = 0; i < n(); ++i)
      y(b * n() + i) = mask(i, v) ? values(i, v) : 0.0;
  }
  return y;
}

Eigen::VectorXd ConcatenatedSystem::predict(const Eigen::VectorXd& coeffs,
                                            const Eigen::VectorXd& cellvals) const {
  if (coeffs.size() != coef_count() || cellvals.size() != cell_count())
    throw ConfigError("parameter vector sizes do not match the system");
  Eigen::VectorXd out(stacked_rows());
  for (Eigen::Index b = 0; b < blocks(); ++b) {
    const Eigen::Index v = equation_vars[static_cast<size_t>(b)];
    const auto preds = block_predictors(*this, v);
    const Eigen::Index base = b * p();
    for (Eigen::Index i = 0; i < n(); ++i) {
      double yhat = coeffs(base);
      for (size_t s = 0; s < preds.size(); ++s) {
        const Eigen::Index u = preds[s];
        const double xval =
            mask(i, u) ? values(i, u) : cellvals(cell_index(u, i));
        yhat += coeffs(base + 1 + static_cast<Eigen::Index>(s)) * xval;
      }
      if (!mask(i, v)) yhat -= cellvals(cell_index(v, i));
      out(b * n() + i) = yhat;
    }
  }
  return out;
}

void ConcatenatedSystem::jacobian(const Eigen::VectorXd& coeffs,
                                  const Eigen::VectorXd& cellvals,
                                  Eigen::MatrixXd& j_coef,
                                  Eigen::MatrixXd& j_cell) const {
  if (coeffs.size() != coef_count() || cellvals.size() != cell_count())
    throw ConfigError("parameter vector sizes do not match the system");
  j_coef.setZero(stacked_rows(), coef_count());
  j_cell.setZero(stacked_rows(), cell_count());
  for (Eigen::Index b = 0; b < blocks(); ++b) {
    const Eigen::Index v = equation_vars[static_cast<size_t>(b)];
    const auto preds = block_predictors(*this, v);
    const Eigen::Index base = b * p();
    for (Eigen::Index i = 0; i < n(); ++i) {
      const Eigen::Index row = b * n() + i;
      j_coef(row, base) = 1.0;
      for (size_t s = 0; s < preds.size(); ++s) {
        const Eigen::Index u = preds[s];
        const Eigen::Index slot = base + 1 + static_cast<Eigen::Index>(s);
        if (mask(i, u)) {
          j_coef(row, slot) = values(i, u);
        } else {
          const Eigen::Index c = cell_index(u, i);
          j_coef(row, slot) = cellvals(c);
          j_cell(row, c) = coeffs(slot);  // slope times the shared parameter
        }
      }
      if (!mask(i, v)) j_cell(row, cell_index(v, i)) = -1.0;
    }
  }
}

Eigen::VectorXd ConcatenatedSystem::default_coefficients() const {
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(coef_count());
  for (Eigen::Index b = 0; b < blocks(); ++b) {
    const Eigen::Index v = equation_vars[static_cast<size_t>(b)];
    const auto preds = block_predictors(*this, v);
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < n(); ++i) {
      bool ok = mask(i, v);
      for (auto u : preds) ok = ok && mask(i, u);
      if (ok) rows.push_back(i);
    }
    const Eigen::Index base = b * p();
    bool fitted = false;
    if (static_cast<Eigen::Index>(rows.size()) > p()) {
      Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), p());
      Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
      for (size_t r = 0; r < rows.size(); ++r) {
        X(static_cast<Eigen::Index>(r), 0) = 1.0;
        for (size_t s = 0; s < preds.size(); ++s)
          X(static_cast<Eigen::Index>(r), 1 + static_cast<Eigen::Index>(s)) =
              values(rows[r], preds[s]);
        y(static_cast<Eigen::Index>(r)) = values(rows[r], v);
      }
      try {
        coeffs.segment(base, p()) = fit_ols(X, y).coefficients;
        fitted = true;
      } catch (const SingularError&) {
      }
    }
    if (!fitted) {
      // too few complete rows for this block: observed mean, flat slopes
      double sum = 0.0;
      Eigen::Index cnt = 0;
      for (Eigen::Index i = 0; i < n(); ++i)
        if (mask(i, v)) {
          sum += values(i, v);
          ++cnt;
        }
      coeffs(base) = cnt ? sum / static_cast<double>(cnt) : 0.0;
    }
  }
  return coeffs;
}

Eigen::VectorXd ConcatenatedSystem::default_cell_values() const {
  Eigen::VectorXd cellvals(cell_count());
  for (Eigen::Index c = 0; c < cell_count(); ++c) {
    const Eigen::Index v = cells[static_cast<size_t>(c)].variable;
    double sum = 0.0;
    Eigen::Index cnt = 0;
    for (Eigen::Index i = 0; i < n(); ++i)
      if (mask(i, v)) {
        sum += values(i, v);
        ++cnt;
      }
    cellvals(c) = cnt ? sum / static_cast<double>(cnt) : 0.0;
  }
  return cellvals;
}

ConcatenatedSystem build_concatenated(const Dataset& d) {
  d.check();
  ConcatenatedSystem sys;
  sys.values = d.values;
  sys.mask = d.mask;
  sys.names = d.names;
  for (Eigen::Index j = 0; j < d.cols(); ++j) {
    const auto mis = d.missing_rows(j);
    if (mis.empty()) continue;
    if (static_cast<Eigen::Index>(mis.size()) == d.rows())
      throw ConfigError("variable '" + d.names[static_cast<size_t>(j)] +
                        "' is missing in every row and cannot be identified");
    sys.equation_vars.push_back(j);
    for (auto i : mis) sys.cells.push_back({j, i});
  }
  if (sys.equation_vars.empty())
    throw ConfigError("dataset has no missing cells; nothing to impute");
  return sys;
}

namespace detail {

CellTransform CellTransform::identity(Eigen::Index n_cells) {
  CellTransform t;
  t.raw_count = n_cells;
  t.value = [](const Eigen::VectorXd& raw) { return raw; };
  t.jacobian = [n_cells](const Eigen::VectorXd&) {
    return Eigen::MatrixXd::Identity(n_cells, n_cells);
  };
  return t;
}

void fill_result_statistics(const ConcatenatedSystem& sys,
                            const CellTransform& transform,
                            const Eigen::VectorXd& raw_cells,
                            const LmOutcome& lm, NlsResult& result) {
  const Eigen::Index nc = sys.coef_count();
  const Eigen::Index nr = transform.raw_count;
  const Eigen::Index np = nc + nr;
  const Eigen::Index ncell = sys.cell_count();

  // raw: stacked rows minus the optimized parameter count; adjusted:
  // stacked rows divided by the block count (the concatenation repeats
  // each observation once per block)
  result.df_raw = sys.stacked_rows() - np;
  result.df_adjusted = sys.n() - np;

  const Eigen::MatrixXd& J = lm.jacobian;
  // usable columns: free and numerically present
  double max_col = 0.0;
  for (Eigen::Index j = 0; j < np; ++j) max_col = std::max(max_col, J.col(j).norm());
  std::vector<Eigen::Index> use;
  for (Eigen::Index j = 0; j < np; ++j) {
    if (lm.at_lower[static_cast<size_t>(j)]) continue;
    if (J.col(j).norm() <= 1e-10 * std::max(max_col, 1.0)) continue;
    use.push_back(j);
  }

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(np, np);
  result.se_available = false;
  if (!use.empty()) {
    Eigen::MatrixXd Ju(J.rows(), static_cast<Eigen::Index>(use.size()));
    for (size_t c = 0; c < use.size(); ++c)
      Ju.col(static_cast<Eigen::Index>(c)) = J.col(use[c]);
    const Eigen::MatrixXd jtj = Ju.transpose() * Ju;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(jtj);
    const Eigen::VectorXd piv = ldlt.vectorD();
    const double pmax = piv.cwiseAbs().maxCoeff();
    if (ldlt.info() == Eigen::Success && pmax > 0.0 &&
        piv.minCoeff() > 1e-14 * pmax) {
      const Eigen::MatrixXd inv = ldlt.solve(
          Eigen::MatrixXd::Identity(jtj.rows(), jtj.cols()));
      for (size_t a = 0; a < use.size(); ++a)
        for (size_t b = 0; b < use.size(); ++b)
          cov(use[a], use[b]) = inv(static_cast<Eigen::Index>(a),
                                    static_cast<Eigen::Index>(b));
      result.se_available = true;
    }
  }

  const Eigen::MatrixXd G = transform.jacobian(raw_cells);  // ncell x nr
  const Eigen::MatrixXd cov_raw = cov.block(nc, nc, nr, nr);

  auto fill = [&](double df, Eigen::VectorXd& coef_se, Eigen::VectorXd& cell_se) {
    coef_se.setConstant(nc, kNaN);
    cell_se.setConstant(ncell, kNaN);
    if (!result.se_available || df < 1.0) return;
    const double s2 = result.sse / df;
    for (Eigen::Index j = 0; j < nc; ++j)
      coef_se(j) = std::sqrt(std::max(0.0, s2 * cov(j, j)));
    for (Eigen::Index m = 0; m < ncell; ++m) {
      const Eigen::VectorXd g = G.row(m);
      cell_se(m) = std::sqrt(std::max(0.0, s2 * g.dot(cov_raw * g)));
    }
  };
  fill(static_cast<double>(result.df_raw), result.coef_se_raw, result.cell_se_raw);
  fill(static_cast<double>(result.df_adjusted), result.coef_se_adjusted,
       result.cell_se_adjusted);

  // a cell pinned at a bound: exactly one raw parameter, unit derivative,
  // frozen by the active set
  result.cell_at_bound.assign(static_cast<size_t>(ncell), 0);
  for (Eigen::Index m = 0; m < ncell; ++m) {
    Eigen::Index owner = -1;
    int nonzero = 0;
    for (Eigen::Index r = 0; r < nr; ++r)
      if (G(m, r) != 0.0) {
        ++nonzero;
        owner = r;
      }
    if (nonzero == 1 && G(m, owner) == 1.0 &&
        lm.at_lower[static_cast<size_t>(nc + owner)]) {
      result.cell_at_bound[static_cast<size_t>(m)] = 1;
      if (result.se_available) {
        if (result.df_raw >= 1) result.cell_se_raw(m) = 0.0;
        if (result.df_adjusted >= 1) result.cell_se_adjusted(m) = 0.0;
      }
    }
  }
}

NlsResult solve_with_transform(const ConcatenatedSystem& sys,
                               const Eigen::VectorXd& coef0,
                               const Eigen::VectorXd& raw0,
                               const CellTransform& transform,
                               const NlsOptions& opts,
                               const Eigen::VectorXd& raw_lower) {
  const Eigen::Index nc = sys.coef_count();
  const Eigen::Index nr = transform.raw_count;
  const Eigen::VectorXd y = sys.stacked_response();

  LmProblem prob;
  prob.residual = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return y - sys.predict(x.head(nc), transform.value(x.tail(nr)));
  };
  prob.jacobian = [&](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    Eigen::MatrixXd jc, jm;
    const Eigen::VectorXd raw = x.tail(nr);
    sys.jacobian(x.head(nc), transform.value(raw), jc, jm);
    Eigen::MatrixXd J(sys.stacked_rows(), nc + nr);
    J.leftCols(nc) = -jc;
    J.rightCols(nr) = -(jm * transform.jacobian(raw));
    return J;
  };

  LmOptions lmopts;
  lmopts.tol = opts.tol;
  lmopts.grad_tol = opts.grad_tol;
  lmopts.max_iter = opts.max_iter;
  lmopts.lambda0 = opts.lambda0;
  lmopts.lower = raw_lower;

  Eigen::VectorXd x0(nc + nr);
  x0 << coef0, raw0;
  const LmOutcome lm = lm_minimize(prob, std::move(x0), lmopts);

  NlsResult result;
  result.coefficients = lm.x.head(nc);
  const Eigen::VectorXd raw = lm.x.tail(nr);
  result.cell_values = transform.value(raw);
  result.sse = lm.sse;
  result.iterations = lm.iterations;
  result.converged = lm.converged;
  fill_result_statistics(sys, transform, raw, lm, result);
  return result;
}

}  // namespace detail

NlsResult solve_concatenated(const ConcatenatedSystem& sys, const NlsInit& init,
                             const NlsOptions& opts) {
  const Eigen::VectorXd coef0 =
      init.coefficients ? *init.coefficients : sys.default_coefficients();
  const Eigen::VectorXd cells0 =
      init.cells ? *init.cells : sys.default_cell_values();
  if (coef0.size() != sys.coef_count() || cells0.size() != sys.cell_count())
    throw ConfigError("init vector sizes do not match the system");

  Eigen::VectorXd lower;
  if (opts.cell_lower_bounds) {
    if (opts.cell_lower_bounds->size() != sys.cell_count())
      throw ConfigError("cell bound vector size does not match the system");
    lower.setConstant(sys.param_count(),
                      -std::numeric_limits<double>::infinity());
    lower.tail(sys.cell_count()) = *opts.cell_lower_bounds;
  }
  return detail::solve_with_transform(
      sys, coef0, cells0, detail::CellTransform::identity(sys.cell_count()),
      opts, lower);
}

NlsResult alternating_solve(const ConcatenatedSystem& sys, const NlsInit& init,
                            const NlsOptions& opts) {
  Eigen::VectorXd coeffs =
      init.coefficients ? *init.coefficients : sys.default_coefficients();
  Eigen::VectorXd cellvals = init.cells ? *init.cells : sys.default_cell_values();
  if (coeffs.size() != sys.coef_count() || cellvals.size() != sys.cell_count())
    throw ConfigError("init vector sizes do not match the system");
  if (opts.cell_lower_bounds)
    throw ConfigError("alternating_solve does not support bounds");

  const Eigen::VectorXd y = sys.stacked_response();
  const Eigen::Index n = sys.n();

  bool converged = false;
  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    double change = 0.0;
    auto track = [&change](double prev, double next) {
      change = std::max(change, std::abs(next - prev) /
                                    std::max({1.0, std::abs(prev), std::abs(next)}));
    };

    // cells first: the model is linear in them once coefficients are fixed,
    // so a response-only system lands on the closed form in one sweep
    {
      Eigen::MatrixXd jc, jm;
      sys.jacobian(coeffs, cellvals, jc, jm);
      const Eigen::VectorXd f0 =
          sys.predict(coeffs, Eigen::VectorXd::Zero(sys.cell_count()));
      const Eigen::VectorXd cells_new = jm.colPivHouseholderQr().solve(y - f0);
      for (Eigen::Index c = 0; c < sys.cell_count(); ++c)
        track(cellvals(c), cells_new(c));
      cellvals = cells_new;
    }

    // coefficients: ordinary per-block regressions on the completed data
    for (Eigen::Index b = 0; b < sys.blocks(); ++b) {
      const Eigen::Index v = sys.equation_vars[static_cast<size_t>(b)];
      Eigen::MatrixXd X(n, sys.p());
      Eigen::VectorXd yb(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        Eigen::Index s = 1;
        for (Eigen::Index u = 0; u < sys.p(); ++u) {
          if (u == v) continue;
          X(i, s++) = sys.mask(i, u) ? sys.values(i, u)
                                     : cellvals(sys.cell_index(u, i));
        }
        yb(i) = sys.mask(i, v) ? sys.values(i, v)
                               : cellvals(sys.cell_index(v, i));
      }
      const Eigen::VectorXd b_new = fit_ols(X, yb).coefficients;
      for (Eigen::Index j = 0; j < sys.p(); ++j)
        track(coeffs(b * sys.p() + j), b_new(j));
      coeffs.segment(b * sys.p(), sys.p()) = b_new;
    }

    if (change < opts.tol) {
      converged = true;
      ++iter;
      break;
    }
  }

  NlsResult result;
  result.coefficients = coeffs;
  result.cell_values = cellvals;
  result.sse = (y - sys.predict(coeffs, cellvals)).squaredNorm();
  result.iterations = iter;
  result.converged = converged;

  detail::LmOutcome shim;
  shim.x.resize(sys.param_count());
  shim.x << coeffs, cellvals;
  shim.sse = result.sse;
  shim.converged = converged;
  shim.at_lower.assign(static_cast<size_t>(sys.param_count()), 0);
  Eigen::MatrixXd jc, jm;
  sys.jacobian(coeffs, cellvals, jc, jm);
  shim.jacobian.resize(sys.stacked_rows(), sys.param_count());
  shim.jacobian.leftCols(sys.coef_count()) = -jc;
  shim.jacobian.rightCols(sys.cell_count()) = -jm;
  detail::fill_result_statistics(
      sys, detail::CellTransform::identity(sys.cell_count()), cellvals, shim,
      result);
  return result;
}

DirectionalEstimates bivariate_directional(const Dataset& d,
                                           const std::string& x,
                                           const std::string& y) {
  d.check();
  const Eigen::Index xc = d.column(x), yc = d.column(y);

  std::vector<Eigen::Index> pairs, mis_x, mis_y;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    const bool ox = d.mask(i, xc), oy = d.mask(i, yc);
    if (!ox && !oy)
      throw ConfigError("row " + std::to_string(i + 1) +
                        " is missing both variables; the directional forms "
                        "need a complementary pattern");
    if (ox && oy) pairs.push_back(i);
    else if (!ox) mis_x.push_back(i);
    else mis_y.push_back(i);
  }
  if (pairs.size() < 3)
    throw ConfigError("need at least 3 complete pairs, have " +
                      std::to_string(pairs.size()));

  const auto np = static_cast<Eigen::Index>(pairs.size());
  Eigen::MatrixXd Xyx(np, 2), Xxy(np, 2);
  Eigen::VectorXd yv(np), xv(np);
  for (Eigen::Index r = 0; r < np; ++r) {
    const Eigen::Index i = pairs[static_cast<size_t>(r)];
    Xyx(r, 0) = 1.0;
    Xyx(r, 1) = d.values(i, xc);
    Xxy(r, 0) = 1.0;
    Xxy(r, 1) = d.values(i, yc);
    yv(r) = d.values(i, yc);
    xv(r) = d.values(i, xc);
  }
  const OlsFit fit_yx = fit_ols(Xyx, yv);  // y on x
  const OlsFit fit_xy = fit_ols(Xxy, xv);  // x on y

  auto direct_cell = [&](const OlsFit& fit, const std::string& var,
                         Eigen::Index row, double predictor_value) {
    ImputationCell cell;
    cell.row = row;
    cell.variable = var;
    Eigen::Vector2d x0(1.0, predictor_value);
    cell.point = x0.dot(fit.coefficients);
    cell.se = prediction_se(fit.sigma2_hat, leverage(fit, x0));
    return cell;
  };
  auto inverse_cell = [&](const OlsFit& fit, const OlsFit& se_fit,
                          const std::string& var, Eigen::Index row,
                          double observed_response) {
    ImputationCell cell;
    cell.row = row;
    cell.variable = var;
    const double b0 = fit.coefficients(0), b1 = fit.coefficients(1);
    // SE always from the direction that predicts this cell's own variable
    Eigen::Vector2d x0(1.0, observed_response);
    cell.se = prediction_se(se_fit.sigma2_hat, leverage(se_fit, x0));
    if (std::abs(b1) < 1e-12) {
      cell.point = kNaN;
      cell.se = kNaN;
      cell.error = "slope is zero; the inverted regression cannot recover "
                   "this value";
      return cell;
    }
    cell.point = (observed_response - b0) / b1;
    return cell;
  };

  DirectionalEstimates out;
  out.yx.fit = fit_yx;
  out.xy.fit = fit_xy;
  for (auto i : mis_y) {
    out.yx.cells.push_back(direct_cell(fit_yx, y, i, d.values(i, xc)));
    out.xy.cells.push_back(inverse_cell(fit_xy, fit_yx, y, i, d.values(i, xc)));
  }
  for (auto i : mis_x) {
    out.yx.cells.push_back(inverse_cell(fit_yx, fit_xy, x, i, d.values(i, yc)));
    out.xy.cells.push_back(direct_cell(fit_xy, x, i, d.values(i, yc)));
  }
  return out;
}

ImputationSet to_imputation_set(const ConcatenatedSystem& sys,
                                const NlsResult& result,
                                const std::string& se_convention) {
  const Eigen::VectorXd& se = se_convention == "adjusted"
                                  ? result.cell_se_adjusted
                                  : result.cell_se_raw;
  ImputationSet out;
  for (Eigen::Index c = 0; c < sys.cell_count(); ++c) {
    ImputationCell cell;
    cell.row = sys.cells[static_cast<size_t>(c)].row;
    cell.variable =
        sys.names[static_cast<size_t>(sys.cells[static_cast<size_t>(c)].variable)];
    cell.point = result.cell_values(c);
    cell.se = se.size() ? se(c) : kNaN;
    out.cells.push_back(std::move(cell));
  }
  return out;
}

std::string to_json(const ConcatenatedSystem& sys, const NlsResult& result) {
  using json = nlohmann::ordered_json;
  auto num = [](double v) -> json {
    if (std::isnan(v)) return nullptr;
    return v;
  };

  json doc;
  doc["equations"] = json::array();
  for (Eigen::Index b = 0; b < sys.blocks(); ++b) {
    const Eigen::Index v = sys.equation_vars[static_cast<size_t>(b)];
    json eq;
    eq["response"] = sys.names[static_cast<size_t>(v)];
    const Eigen::Index base = b * sys.p();
    eq["intercept"] = result.coefficients(base);
    eq["intercept_se_raw"] = num(result.coef_se_raw.size()
                                     ? result.coef_se_raw(base)
                                     : kNaN);
    json slopes = json::object();
    Eigen::Index s = 1;
    for (Eigen::Index u = 0; u < sys.p(); ++u) {
      if (u == v) continue;
      slopes[sys.names[static_cast<size_t>(u)]] = result.coefficients(base + s);
      ++s;
    }
    eq["slopes"] = slopes;
    doc["equations"].push_back(eq);
  }

  doc["imputations"] = json::array();
  for (Eigen::Index c = 0; c < sys.cell_count(); ++c) {
    const auto& cell = sys.cells[static_cast<size_t>(c)];
    json item;
    item["variable"] = sys.names[static_cast<size_t>(cell.variable)];
    item["row"] = cell.row + 1;  // reports use 1-based observations
    item["value"] = result.cell_values(c);
    item["se_raw"] = num(result.cell_se_raw.size() ? result.cell_se_raw(c) : kNaN);
    item["se_adjusted"] =
        num(result.cell_se_adjusted.size() ? result.cell_se_adjusted(c) : kNaN);
    item["at_bound"] =
        !result.cell_at_bound.empty() && result.cell_at_bound[static_cast<size_t>(c)];
    doc["imputations"].push_back(item);
  }

  doc["convergence"] = {{"converged", result.converged},
                        {"iterations", result.iterations},
                        {"sse", result.sse}};
  doc["df"] = {{"raw", result.df_raw},
               {"adjusted", result.df_adjusted},
               {"se_available", result.se_available}};
  return doc.dump(2);
}

}  // namespace regem
