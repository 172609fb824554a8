#pragma once

#include <Eigen/Dense>

#include <functional>

#include "lm.hpp"
#include "regem/nls.hpp"

namespace regem::detail {

// Maps the optimizer's raw cell parameters to cell values (identity, exp,
// share-of-total...). `jacobian` returns d(cells)/d(raw).
struct CellTransform {
  Eigen::Index raw_count = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> value;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;

  static CellTransform identity(Eigen::Index n_cells);
};

// Shared LM driver for the plain and the constrained solves. `raw_lower`
// may be empty; it applies to [coefficients; raw cells] jointly.
NlsResult solve_with_transform(const ConcatenatedSystem& sys,
                               const Eigen::VectorXd& coef0,
                               const Eigen::VectorXd& raw0,
                               const CellTransform& transform,
                               const NlsOptions& opts,
                               const Eigen::VectorXd& raw_lower);

// Standard errors, df bookkeeping and the frozen/degenerate column handling
// for a solution already found by any route.
void fill_result_statistics(const ConcatenatedSystem& sys,
                            const CellTransform& transform,
                            const Eigen::VectorXd& raw_cells,
                            const LmOutcome& lm, NlsResult& result);

}  // namespace regem::detail
