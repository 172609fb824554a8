#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "regem/closed_form.hpp"
#include "regem/dataset.hpp"
#include "regem/nls.hpp"

namespace regem {

struct DrawSummary {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n-1), 0 for a single draw
  double p2_5 = 0.0;
  double p50 = 0.0;
  double p97_5 = 0.0;
};

struct CellDraws {
  Eigen::Index row = 0;  // 0-based
  std::string variable;
  std::vector<double> draws;

  DrawSummary summary() const;
};

struct ImputationDraws {
  std::vector<CellDraws> cells;
  std::uint64_t seed = 0;
  std::string method;  // "normal-mi" or "bootstrap"
  // Bootstrap accounting; accepted + discarded == attempted.
  int attempted = 0;
  int accepted = 0;
  int discarded = 0;

  const CellDraws* find(const std::string& variable, Eigen::Index row) const;
};

// M independent normal draws per cell, mean = point and sd = se from the
// analytic imputation. One generator substream per cell derived from the
// seed, so the output is independent of evaluation order.
ImputationDraws multiple_impute(const ImputationSet& imp, int M,
                                std::uint64_t seed);

enum class BootstrapEstimator {
  kAuto,        // closed form for response-only patterns, otherwise NLS
  kClosedForm,
  kNls,
  kTwoWay,
};

struct BootstrapOptions {
  BootstrapEstimator estimator = BootstrapEstimator::kAuto;
  std::string response;                 // closed-form only
  std::vector<std::string> predictors;  // closed-form only; empty = all others
  NlsOptions nls;
  // Replicates with any imputed value below this are discarded and redrawn.
  std::optional<double> min_valid;
  // When set, resampling continues until every original missing cell has at
  // least this many draws (B is ignored).
  std::optional<int> target_count;
};

// Resamples n rows with replacement, reruns the estimator, and records the
// replicate's estimates for whichever original missing cells appear in the
// sample; cells absent from a replicate simply receive no draw, so per-cell
// draw counts differ. Replicates where the estimator fails are discarded
// and counted. Aborts with a diagnostic when more than 90% of attempts
// discard.
ImputationDraws bootstrap_impute(const Dataset& d, const BootstrapOptions& opts,
                                 int B, std::uint64_t seed);

// Additive row+column (two-way) reduction of an n x p table to a single
// response vector, imputed in closed form. The additive model ignores
// correlations between the variables; results carry a misspecification
// note and should be read with that caveat.
ImputationSet two_way_impute(const Dataset& table);

// cell id, replicate, value  (rows 1-based, replicates 1-based)
void write_draws_csv(const ImputationDraws& draws, std::ostream& out);

// Plot-ready JSON summary: per-cell count/mean/sd/percentiles plus the
// accounting fields.
std::string draws_summary_json(const ImputationDraws& draws);

}  // namespace regem
