#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace regem::cli {

enum class Method {
  kClosedForm,
  kEm,
  kNls,
  kConstrained,
  kTwoWay,
  kBootstrap,
  kMi,
};

Method parse_method(const std::string& name);
std::string to_string(Method m);

// Everything a batch run needs. Defaults are recorded in the report
// metadata so a report is reproducible from its own contents.
struct RunConfig {
  std::string input;
  Method method = Method::kClosedForm;
  std::string response;
  std::vector<std::string> predictors;  // empty = all other variables
  std::string constraints_path;         // constrained method only
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<int> B;                 // bootstrap replicates
  std::optional<int> M;                 // multiple-imputation draws
  std::optional<std::uint64_t> seed;    // required for bootstrap and mi
  std::optional<double> min_valid;      // bootstrap discard threshold
  std::string init = "complete-case";   // em: "complete-case" or b0,b1,...
  std::string out;                      // report JSON (required)
  std::string trace_out;                // em trace CSV
  std::string draws_out;                // bootstrap/mi draws CSV
  std::string df_convention = "both";   // raw | adjusted | both
  std::set<std::string> missing_tokens = {"", ".", "NA"};

  void validate() const;  // throws ConfigError on a bad combination
};

// Executes the run and writes the report (and optional trace/draws files).
// Throws on any failure; the command line wrapper turns exceptions into a
// machine-readable error JSON and a nonzero exit status.
void run(const RunConfig& config);

// Merges >= 2 run reports over the same dataset into a long-format CSV
// (variable,row,method,point,se) for side-by-side comparison or plotting.
void compare(const std::vector<std::string>& report_paths,
             const std::string& out_csv);

// {"schema":1,"error":{"type":...,"message":...}}
std::string error_json(const std::exception& e);

}  // namespace regem::cli
