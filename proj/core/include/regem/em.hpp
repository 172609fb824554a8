#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "regem/closed_form.hpp"
#include "regem/dataset.hpp"
#include "regem/ols.hpp"

namespace regem {

struct EmIteration {
  int tau = 0;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd imputations;  // fills for the missing rows at this iterate
  double sse = 0.0;             // completed-data SSE (missing rows self-filled)
  double neg2ll = 0.0;          // -2 log L with sigma2 profiled as sse/n
};

struct EmTrace {
  std::vector<EmIteration> iterations;
  bool converged = false;
  int final_tau = 0;
};

struct EmOptions {
  // Convergence on coefficients, not SSE: the SSE plateaus while
  // coefficients still move in the fourth decimal.
  double tol = 1e-10;
  int max_iter = 500;
  // Empty = start from the complete-case fit, which converges immediately.
  std::optional<Eigen::VectorXd> init;
};

struct EmResult {
  OlsFit fit;               // complete-case fit (the EM limit)
  ImputationSet imputations;
  EmTrace trace;
};

// The classical fill/refit iteration: fill missing responses with the
// current predictions, refit on the completed data, repeat until the
// coefficient change drops below tol (relative for large magnitudes).
// Requires missingness confined to the response variable.
EmResult run_em(const Dataset& d, const std::string& response,
                const std::vector<std::string>& predictors,
                const EmOptions& opts = {});

// One fill+refit update from a coefficient vector; exposed so monotonicity
// and the fixed-point property are testable in isolation. The returned fit
// is over the completed data (df = n - k).
OlsFit em_step(const Dataset& d, const std::string& response,
               const std::vector<std::string>& predictors,
               const Eigen::VectorXd& coefficients);

// CSV layout: tau,b0,...,b{k-1},sse,neg2ll  (one row per iteration).
void write_trace_csv(const EmTrace& trace, std::ostream& out);

}  // namespace regem
