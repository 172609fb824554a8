#include "regem/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nls_internal.hpp"
#include "regem/errors.hpp"

namespace regem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

VariableMode parse_mode(const std::string& s) {
  if (s == "none") return VariableMode::kNone;
  if (s == "total-linear") return VariableMode::kTotalLinear;
  if (s == "nonneg-exp") return VariableMode::kNonnegExp;
  if (s == "total-ratio") return VariableMode::kTotalRatio;
  throw ParseError("unknown constraint mode '" + s + "'");
}

double safe_exp(double a) { return std::exp(std::clamp(a, -745.0, 709.0)); }

}  // namespace

std::string to_string(VariableMode m) {
  switch (m) {
    case VariableMode::kNone: return "none";
    case VariableMode::kTotalLinear: return "total-linear";
    case VariableMode::kNonnegExp: return "nonneg-exp";
    case VariableMode::kTotalRatio: return "total-ratio";
  }
  return "unknown";
}

ConstraintSpec ConstraintSpec::from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("constraint spec: ") + e.what());
  }

  ConstraintSpec spec;
  try {
    if (doc.contains("variables")) {
      for (auto& [name, v] : doc["variables"].items()) {
        VariableConstraint vc;
        if (v.contains("mode")) vc.mode = parse_mode(v["mode"].get<std::string>());
        if (v.contains("total")) vc.total = v["total"].get<double>();
        if (v.contains("preserve_mean"))
          vc.preserve_mean = v["preserve_mean"].get<bool>();
        spec.variables[name] = vc;
      }
    }
    if (doc.contains("bounds")) {
      for (auto& b : doc["bounds"]) {
        CellBound cb;
        cb.variable = b.at("variable").get<std::string>();
        cb.row = b.at("row").get<Eigen::Index>() - 1;  // document is 1-based
        cb.lower = b.at("lower").get<double>();
        if (cb.row < 0)
          throw ParseError("bound rows are 1-based; got " +
                           std::to_string(cb.row + 1));
        spec.bounds.push_back(cb);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("constraint spec: ") + e.what());
  }
  return spec;
}

ConstraintSpec ConstraintSpec::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open constraint spec '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

namespace {

double resolved_total(const Dataset& d, const std::string& name,
                      const VariableConstraint& vc) {
  if (vc.preserve_mean) {
    const Eigen::Index j = d.column(name);
    const auto nm = static_cast<double>(d.missing_rows(j).size());
    return nm * d.observed_mean(j);
  }
  if (!vc.total)
    throw ConfigError("variable '" + name +
                      "' uses a total mode but gives no total");
  return *vc.total;
}

}  // namespace

void ConstraintSpec::check(const Dataset& d) const {
  for (const auto& [name, vc] : variables) {
    const Eigen::Index j = d.column(name);
    const auto nm = static_cast<Eigen::Index>(d.missing_rows(j).size());
    if (nm == 0)
      throw ConfigError("variable '" + name + "' has no missing cells to constrain");
    if (vc.preserve_mean && vc.total)
      throw ConfigError("variable '" + name +
                        "': preserve_mean and an explicit total are mutually "
                        "exclusive");
    const bool has_total = vc.mode == VariableMode::kTotalLinear ||
                           vc.mode == VariableMode::kTotalRatio;
    if (has_total) {
      const double T = resolved_total(d, name, vc);
      if (vc.mode == VariableMode::kTotalRatio && !(T > 0.0))
        throw ConfigError("variable '" + name +
                          "': the ratio form needs a positive total");
      // feasibility of explicit lower bounds against the total
      double lb_sum = 0.0;
      Eigen::Index bounded = 0;
      for (const auto& b : bounds)
        if (b.variable == name) {
          lb_sum += b.lower;
          ++bounded;
        }
      if (bounded == nm && lb_sum > T)
        throw ConfigError("variable '" + name + "': infeasible, total " +
                          std::to_string(T) + " is below the bound sum " +
                          std::to_string(lb_sum));
    }
    if ((vc.total || vc.preserve_mean) && !has_total)
      throw ConfigError("variable '" + name +
                        "': a total needs mode total-linear or total-ratio");
  }
  for (const auto& b : bounds) {
    const Eigen::Index j = d.column(b.variable);
    if (d.mask(b.row, j))
      throw ConfigError("bound on '" + b.variable + "' row " +
                        std::to_string(b.row + 1) + ": that cell is observed");
    auto it = variables.find(b.variable);
    if (it != variables.end() && it->second.mode != VariableMode::kNone)
      throw ConfigError("bound on '" + b.variable +
                        "' conflicts with its mode " + to_string(it->second.mode) +
                        "; combine a total and nonnegativity via total-ratio");
  }
}

ImputationSet impute_with_total(const Dataset& d, const std::string& response,
                                const std::vector<std::string>& predictors,
                                double total) {
  ImputationSet base = impute_closed_form(d, response, predictors);
  const auto nm = static_cast<Eigen::Index>(base.cells.size());
  if (nm == 0)
    throw ConfigError("response '" + response +
                      "' has no missing cells: nothing to constrain");

  // the constrained optimum shifts every prediction by the same amount
  double sum = 0.0;
  for (const auto& c : base.cells) sum += c.point;
  const double shift = (total - sum) / static_cast<double>(nm);
  for (auto& c : base.cells) c.point += shift;

  // delta method through v = (I - 11^T/n_m) p over the prediction
  // covariance sigma2 (I + X_m (X^T X)^{-1} X_m^T)
  const Eigen::Index yc = d.column(response);
  const auto mis = d.missing_rows(yc);
  Eigen::MatrixXd Xm(nm, base.fit.k());
  for (Eigen::Index m = 0; m < nm; ++m) {
    Xm(m, 0) = 1.0;
    for (size_t c = 0; c < predictors.size(); ++c)
      Xm(m, 1 + static_cast<Eigen::Index>(c)) =
          d.values(mis[static_cast<size_t>(m)], d.column(predictors[c]));
  }
  Eigen::MatrixXd pred_cov =
      base.fit.sigma2_hat *
      (Eigen::MatrixXd::Identity(nm, nm) + Xm * base.fit.xtx_inv * Xm.transpose());
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(nm, nm) -
                      Eigen::MatrixXd::Constant(nm, nm, 1.0 / static_cast<double>(nm));
  const Eigen::MatrixXd V = A * pred_cov * A.transpose();
  for (Eigen::Index m = 0; m < nm; ++m)
    base.cells[static_cast<size_t>(m)].se = std::sqrt(std::max(0.0, V(m, m)));
  return base;
}

namespace {

struct Group {
  VariableMode mode = VariableMode::kNone;
  double total = 0.0;
  Eigen::Index cell_start = 0;  // offset into sys.cells
  Eigen::Index n_cells = 0;
  Eigen::Index raw_start = 0;
  Eigen::Index n_raw = 0;
};

}  // namespace

NlsResult constrained_nls(const ConcatenatedSystem& sys,
                          const ConstraintSpec& spec, const NlsOptions& opts) {
  if (opts.cell_lower_bounds)
    throw ConfigError("pass bounds through the constraint spec, not NlsOptions");

  Dataset view{sys.values, sys.mask, sys.names};
  spec.check(view);

  // cells are grouped by variable; carve them into transform groups
  std::vector<Group> groups;
  Eigen::Index raw_total = 0;
  for (Eigen::Index c = 0; c < sys.cell_count();) {
    const Eigen::Index v = sys.cells[static_cast<size_t>(c)].variable;
    Group g;
    g.cell_start = c;
    while (c < sys.cell_count() && sys.cells[static_cast<size_t>(c)].variable == v)
      ++c;
    g.n_cells = c - g.cell_start;
    const std::string& name = sys.names[static_cast<size_t>(v)];
    if (auto it = spec.variables.find(name); it != spec.variables.end()) {
      g.mode = it->second.mode;
      if (g.mode == VariableMode::kTotalLinear ||
          g.mode == VariableMode::kTotalRatio)
        g.total = resolved_total(view, name, it->second);
    }
    g.raw_start = raw_total;
    g.n_raw = (g.mode == VariableMode::kTotalLinear ||
               g.mode == VariableMode::kTotalRatio)
                  ? g.n_cells - 1
                  : g.n_cells;
    raw_total += g.n_raw;
    groups.push_back(g);
  }

  const Eigen::Index ncell = sys.cell_count();
  detail::CellTransform t;
  t.raw_count = raw_total;
  t.value = [groups, ncell](const Eigen::VectorXd& raw) {
    Eigen::VectorXd cells(ncell);
    for (const auto& g : groups) {
      switch (g.mode) {
        case VariableMode::kNone:
          cells.segment(g.cell_start, g.n_cells) = raw.segment(g.raw_start, g.n_raw);
          break;
        case VariableMode::kNonnegExp:
          for (Eigen::Index i = 0; i < g.n_cells; ++i)
            cells(g.cell_start + i) = safe_exp(raw(g.raw_start + i));
          break;
        case VariableMode::kTotalLinear: {
          double sum = 0.0;
          for (Eigen::Index i = 0; i < g.n_raw; ++i) {
            cells(g.cell_start + i) = raw(g.raw_start + i);
            sum += raw(g.raw_start + i);
          }
          cells(g.cell_start + g.n_cells - 1) = g.total - sum;
          break;
        }
        case VariableMode::kTotalRatio: {
          double peak = 0.0;
          for (Eigen::Index i = 0; i < g.n_raw; ++i)
            peak = std::max(peak, raw(g.raw_start + i));
          double den = safe_exp(-peak);
          for (Eigen::Index i = 0; i < g.n_raw; ++i)
            den += safe_exp(raw(g.raw_start + i) - peak);
          for (Eigen::Index i = 0; i < g.n_raw; ++i)
            cells(g.cell_start + i) =
                g.total * safe_exp(raw(g.raw_start + i) - peak) / den;
          cells(g.cell_start + g.n_cells - 1) = g.total * safe_exp(-peak) / den;
          break;
        }
      }
    }
    return cells;
  };
  t.jacobian = [groups, ncell, raw_total](const Eigen::VectorXd& raw) {
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(ncell, raw_total);
    for (const auto& g : groups) {
      switch (g.mode) {
        case VariableMode::kNone:
          for (Eigen::Index i = 0; i < g.n_cells; ++i)
            G(g.cell_start + i, g.raw_start + i) = 1.0;
          break;
        case VariableMode::kNonnegExp:
          for (Eigen::Index i = 0; i < g.n_cells; ++i)
            G(g.cell_start + i, g.raw_start + i) = safe_exp(raw(g.raw_start + i));
          break;
        case VariableMode::kTotalLinear:
          for (Eigen::Index i = 0; i < g.n_raw; ++i) {
            G(g.cell_start + i, g.raw_start + i) = 1.0;
            G(g.cell_start + g.n_cells - 1, g.raw_start + i) = -1.0;
          }
          break;
        case VariableMode::kTotalRatio: {
          double peak = 0.0;
          for (Eigen::Index i = 0; i < g.n_raw; ++i)
            peak = std::max(peak, raw(g.raw_start + i));
          double den = safe_exp(-peak);
          for (Eigen::Index i = 0; i < g.n_raw; ++i)
            den += safe_exp(raw(g.raw_start + i) - peak);
          Eigen::VectorXd w(g.n_raw);
          for (Eigen::Index i = 0; i < g.n_raw; ++i)
            w(i) = safe_exp(raw(g.raw_start + i) - peak) / den;
          const double w_last = safe_exp(-peak) / den;
          for (Eigen::Index i = 0; i < g.n_raw; ++i) {
            for (Eigen::Index j = 0; j < g.n_raw; ++j)
              G(g.cell_start + i, g.raw_start + j) =
                  g.total * w(i) * ((i == j ? 1.0 : 0.0) - w(j));
            G(g.cell_start + g.n_cells - 1, g.raw_start + i) =
                -g.total * w_last * w(i);
          }
          break;
        }
      }
    }
    return G;
  };

  // initial raw parameters from the default (or caller-shaped) cell values
  const Eigen::VectorXd coef0 = sys.default_coefficients();
  const Eigen::VectorXd cells0 = sys.default_cell_values();
  Eigen::VectorXd raw0(raw_total);
  for (const auto& g : groups) {
    switch (g.mode) {
      case VariableMode::kNone:
        raw0.segment(g.raw_start, g.n_raw) = cells0.segment(g.cell_start, g.n_cells);
        break;
      case VariableMode::kNonnegExp:
        for (Eigen::Index i = 0; i < g.n_cells; ++i) {
          const double c = cells0(g.cell_start + i);
          raw0(g.raw_start + i) = c > 0.0 ? std::log(c) : 0.0;
        }
        break;
      case VariableMode::kTotalLinear: {
        double sum = cells0.segment(g.cell_start, g.n_cells).sum();
        const double shift =
            (g.total - sum) / static_cast<double>(g.n_cells);
        for (Eigen::Index i = 0; i < g.n_raw; ++i)
          raw0(g.raw_start + i) = cells0(g.cell_start + i) + shift;
        break;
      }
      case VariableMode::kTotalRatio:
        raw0.segment(g.raw_start, g.n_raw).setZero();  // equal shares
        break;
    }
  }

  Eigen::VectorXd lower;
  if (!spec.bounds.empty()) {
    lower.setConstant(sys.coef_count() + raw_total, -kInf);
    for (const auto& b : spec.bounds) {
      const Eigen::Index v = view.column(b.variable);
      const Eigen::Index c = sys.cell_index(v, b.row);
      if (c < 0)
        throw ConfigError("bound on '" + b.variable + "' row " +
                          std::to_string(b.row + 1) +
                          ": no such missing cell in the system");
      // mode-none groups map raw slots one-to-one onto cells
      for (const auto& g : groups)
        if (c >= g.cell_start && c < g.cell_start + g.n_cells)
          lower(sys.coef_count() + g.raw_start + (c - g.cell_start)) = b.lower;
    }
  }

  return detail::solve_with_transform(sys, coef0, raw0, t, opts, lower);
}

CellValueMap cell_values(const ImputationSet& imp) {
  CellValueMap out;
  for (const auto& c : imp.cells)
    out[CellKey{c.variable, c.row}] = c.point;
  return out;
}

double rmse(const CellValueMap& imputed, const CellValueMap& truth) {
  if (imputed.size() != truth.size())
    throw ConfigError("cell sets differ: " + std::to_string(imputed.size()) +
                      " imputed vs " + std::to_string(truth.size()) + " truth");
  double sum = 0.0;
  for (const auto& [key, value] : imputed) {
    auto it = truth.find(key);
    if (it == truth.end())
      throw ConfigError("truth has no cell " + key.variable + "@" +
                        std::to_string(key.row + 1));
    const double d = value - it->second;
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(imputed.size()));
}

}  // namespace regem
