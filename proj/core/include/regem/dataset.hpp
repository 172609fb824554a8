#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace regem {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Rectangular numeric data with an explicit missingness mask.
//
// Missing cells hold a literal 0 in `values` (the indicator-variable
// regression operates on zero-filled responses) and `mask` is false there,
// so a legitimate observed 0 stays unambiguous. Immutable by convention
// once built; estimators never modify a Dataset.
//
// Rows and columns are 0-based throughout the library API. Reports, error
// messages and serialized output use 1-based observation numbers.
struct Dataset {
  Eigen::MatrixXd values;           // n x p, zero-filled at missing cells
  BoolMatrix mask;                  // n x p, true = observed
  std::vector<std::string> names;   // p variable labels

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }

  bool observed(Eigen::Index i, Eigen::Index j) const { return mask(i, j); }

  // Column index for a variable name; throws ConfigError if unknown.
  Eigen::Index column(const std::string& name) const;

  // Indices of rows observed in column j / missing in column j.
  std::vector<Eigen::Index> observed_rows(Eigen::Index j) const;
  std::vector<Eigen::Index> missing_rows(Eigen::Index j) const;

  // Mean of the observed cells of column j; throws if none observed.
  double observed_mean(Eigen::Index j) const;

  // Throws ConfigError unless dimensions are consistent and n,p >= 1.
  void check() const;
};

enum class PatternClass {
  kComplete,
  kResponseOnly,             // exactly one variable has missing cells
  kComplementaryBivariate,   // two variables, never missing together
  kGeneralMultivariate,
};

std::string to_string(PatternClass c);

// Per-variable missingness summary produced by validate().
struct MissingnessPattern {
  PatternClass classification = PatternClass::kComplete;
  std::vector<std::vector<Eigen::Index>> missing_by_var;  // per column
  std::vector<Eigen::Index> n_obs;                        // per column
  std::vector<Eigen::Index> n_missing;                    // per column
  Eigen::Index total_observed = 0;
  Eigen::Index total_missing = 0;
};

// Checks structural invariants and summarizes the missingness pattern.
// A row with no observed cell at all is fatal: such an observation carries
// no information and every estimator here requires at least one measure
// per row. The error names the offending 1-based row.
MissingnessPattern validate(const Dataset& d);

// Reads a CSV file with a header row. Cells whose trimmed text is in
// `missing_tokens` become missing; everything else must parse as a number.
// Ragged or non-numeric rows raise ParseError with the 1-based file line.
Dataset load_csv(const std::string& path,
                 const std::set<std::string>& missing_tokens = {"", ".", "NA"});
Dataset load_csv(std::istream& in, const std::string& origin,
                 const std::set<std::string>& missing_tokens = {"", ".", "NA"});

// Writes the dataset back as CSV, emitting `missing_token` at masked cells.
// load_csv(write_csv(d)) reproduces the mask exactly.
void write_csv(const Dataset& d, const std::string& path,
               const std::string& missing_token = ".");
void write_csv(const Dataset& d, std::ostream& out,
               const std::string& missing_token = ".");

// The 13-observation, 5-variable dataset used throughout the test fixtures:
// X1,X2,X4 carry 15 missing cells (X1,X2 on rows 10-13, X4 on rows 7-13,
// 1-based), X3 and X5 are complete.
Dataset embedded_hald13();

}  // namespace regem
