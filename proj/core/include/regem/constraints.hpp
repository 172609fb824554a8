#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "regem/closed_form.hpp"
#include "regem/dataset.hpp"
#include "regem/nls.hpp"

namespace regem {

enum class VariableMode {
  kNone,
  kTotalLinear,  // imputations sum to T exactly (may go negative)
  kNonnegExp,    // each cell parameter replaced by exp(alpha)
  kTotalRatio,   // positive shares of T: T e^a_k / (1 + sum e^a_j)
};

std::string to_string(VariableMode m);

struct VariableConstraint {
  VariableMode mode = VariableMode::kNone;
  std::optional<double> total;
  bool preserve_mean = false;  // sets T = n_m * mean of the observed cells
};

struct CellBound {
  std::string variable;
  Eigen::Index row = 0;  // 0-based; the JSON document uses 1-based rows
  double lower = 0.0;
};

// Per-variable constraint modes plus per-cell lower bounds. Parsed from a
// small JSON document, see docs/constraints in the README.
struct ConstraintSpec {
  std::map<std::string, VariableConstraint> variables;
  std::vector<CellBound> bounds;

  static ConstraintSpec from_json(const std::string& text);
  static ConstraintSpec from_json_file(const std::string& path);

  // Feasibility and consistency checks against a dataset; throws
  // ConfigError before any solve is attempted (an infeasible total would
  // otherwise fail silently deep inside the optimizer).
  void check(const Dataset& d) const;
};

// Closed-form imputation under a known total: every unconstrained
// prediction shifts by the same amount (T - sum of predictions) / n_m, so
// the set sums to T exactly. With no covariates this is T / n_m for every
// cell. Which cell is ordered last in the formula does not matter.
ImputationSet impute_with_total(const Dataset& d, const std::string& response,
                                const std::vector<std::string>& predictors,
                                double total);

// Constrained concatenated solve. Lower bounds use projection with an
// active-set freeze (a cell frozen at its bound reports SE 0); nonneg-exp
// and total-ratio reparameterize the cell block and report delta-method
// standard errors.
NlsResult constrained_nls(const ConcatenatedSystem& sys,
                          const ConstraintSpec& spec,
                          const NlsOptions& opts = {});

struct CellKey {
  std::string variable;
  Eigen::Index row = 0;  // 0-based

  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};
using CellValueMap = std::map<CellKey, double>;

CellValueMap cell_values(const ImputationSet& imp);

// Root mean squared difference over two maps with identical key sets.
double rmse(const CellValueMap& imputed, const CellValueMap& truth);

}  // namespace regem
