#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "regem/closed_form.hpp"
#include "regem/dataset.hpp"

namespace regem {

struct CellRef {
  Eigen::Index variable = 0;  // column index
  Eigen::Index row = 0;       // 0-based observation index

  friend bool operator==(const CellRef&, const CellRef&) = default;
};

// Stacked multi-equation system: one block per variable with missing cells,
// regressing that variable on all the others. Every missing cell owns a
// single parameter shared across blocks. In its own variable's block the
// parameter enters subtracted (the -1 indicator); in any other block it
// enters multiplied by that block's slope for the variable, which makes the
// model bilinear in (coefficients, cell values).
struct ConcatenatedSystem {
  Eigen::MatrixXd values;  // n x p, zero-filled
  BoolMatrix mask;
  std::vector<std::string> names;
  std::vector<Eigen::Index> equation_vars;  // block order
  std::vector<CellRef> cells;               // grouped by variable, then row

  Eigen::Index n() const { return values.rows(); }
  Eigen::Index p() const { return values.cols(); }
  Eigen::Index blocks() const { return static_cast<Eigen::Index>(equation_vars.size()); }
  Eigen::Index stacked_rows() const { return blocks() * n(); }
  // Per block: intercept + (p-1) slopes, slopes ordered by ascending column
  // index with the response skipped.
  Eigen::Index coef_count() const { return blocks() * p(); }
  Eigen::Index cell_count() const { return static_cast<Eigen::Index>(cells.size()); }
  Eigen::Index param_count() const { return coef_count() + cell_count(); }

  // Index of a cell's parameter among the cells, or -1 when observed.
  Eigen::Index cell_index(Eigen::Index variable, Eigen::Index row) const;

  Eigen::VectorXd stacked_response() const;

  // Stacked model predictions for the given coefficients and cell values.
  Eigen::VectorXd predict(const Eigen::VectorXd& coeffs,
                          const Eigen::VectorXd& cellvals) const;

  // Derivatives of the stacked predictions: d/d(coeffs) and d/d(cellvals).
  void jacobian(const Eigen::VectorXd& coeffs, const Eigen::VectorXd& cellvals,
                Eigen::MatrixXd& j_coef, Eigen::MatrixXd& j_cell) const;

  // Default initialization: per-block complete-case regression coefficients,
  // observed means for the cell values.
  Eigen::VectorXd default_coefficients() const;
  Eigen::VectorXd default_cell_values() const;
};

// One equation per variable with missing cells, predictors = all remaining
// variables. A variable missing in every row is unidentifiable and an error.
ConcatenatedSystem build_concatenated(const Dataset& d);

struct NlsOptions {
  double tol = 1e-12;       // relative SSE change
  double grad_tol = 1e-8;   // infinity norm of J^T r
  int max_iter = 500;
  double lambda0 = 1e-3;    // initial Marquardt damping
  // Optional per-cell lower bounds (size cell_count, -inf where free),
  // enforced by projection with an active-set freeze.
  std::optional<Eigen::VectorXd> cell_lower_bounds;
};

struct NlsInit {
  std::optional<Eigen::VectorXd> coefficients;  // size coef_count
  std::optional<Eigen::VectorXd> cells;         // size cell_count
};

// Degrees of freedom conventions for the stacked system. The concatenation
// multiplies the apparent row count by the number of blocks, so a generic
// residual-variance estimate (raw) understates sigma2 relative to the data
// actually observed; adjusted divides the stacked rows by the block count.
struct NlsResult {
  Eigen::VectorXd coefficients;  // grouped per block
  Eigen::VectorXd cell_values;
  Eigen::VectorXd coef_se_raw, coef_se_adjusted;
  Eigen::VectorXd cell_se_raw, cell_se_adjusted;
  double sse = 0.0;
  int iterations = 0;
  bool converged = false;
  Eigen::Index df_raw = 0;
  Eigen::Index df_adjusted = 0;
  bool se_available = false;           // false when the Jacobian is singular
  std::vector<char> cell_at_bound;     // 1 where a lower bound is active
};

// Damped Gauss-Newton (Levenberg-Marquardt, Marquardt diagonal scaling)
// over the stacked sum of squares. Analytic Jacobian; the model is bilinear
// so it is exact and cheap.
NlsResult solve_concatenated(const ConcatenatedSystem& sys,
                             const NlsInit& init = {},
                             const NlsOptions& opts = {});

// Block-coordinate descent: per-block OLS with cells fixed, then an exact
// linear solve for the cells with coefficients fixed. Slower convergence
// but an entirely independent route to the same optimum; used to cross
// check solve_concatenated.
NlsResult alternating_solve(const ConcatenatedSystem& sys,
                            const NlsInit& init = {},
                            const NlsOptions& opts = {});

// Directional closed forms for the two-variable pattern where no row is
// missing both values. yx carries the estimates implied by regressing y on
// x (direct fills for missing y, inverted fills for missing x); xy the
// converse. Standard errors always come from the direction that predicts
// the cell's own variable, which is the one that matches resampling
// experiments. A zero slope leaves the inverse direction undefined and is
// reported per cell.
struct DirectionalEstimates {
  ImputationSet yx;
  ImputationSet xy;
};
DirectionalEstimates bivariate_directional(const Dataset& d,
                                           const std::string& x,
                                           const std::string& y);

// Imputations as an ImputationSet, picking the requested SE convention
// ("raw" or "adjusted").
ImputationSet to_imputation_set(const ConcatenatedSystem& sys,
                                const NlsResult& result,
                                const std::string& se_convention = "raw");

// JSON document: coefficients grouped by equation, imputations grouped by
// (variable, row) with both SE conventions, convergence metadata.
std::string to_json(const ConcatenatedSystem& sys, const NlsResult& result);

}  // namespace regem
