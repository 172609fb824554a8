#include "regem/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "regem/errors.hpp"

namespace regem {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

Eigen::Index Dataset::column(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ConfigError("unknown variable '" + name + "'");
  return static_cast<Eigen::Index>(it - names.begin());
}

std::vector<Eigen::Index> Dataset::observed_rows(Eigen::Index j) const {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < rows(); ++i)
    if (mask(i, j)) out.push_back(i);
  return out;
}

std::vector<Eigen::Index> Dataset::missing_rows(Eigen::Index j) const {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < rows(); ++i)
    if (!mask(i, j)) out.push_back(i);
  return out;
}

double Dataset::observed_mean(Eigen::Index j) const {
  double sum = 0.0;
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < rows(); ++i) {
    if (mask(i, j)) {
      sum += values(i, j);
      ++count;
    }
  }
  if (count == 0)
    throw ConfigError("variable '" + names[static_cast<size_t>(j)] +
                      "' has no observed values");
  return sum / static_cast<double>(count);
}

void Dataset::check() const {
  if (values.rows() < 1 || values.cols() < 1)
    throw ConfigError("dataset must have at least one row and one column");
  if (mask.rows() != values.rows() || mask.cols() != values.cols())
    throw ConfigError("mask and values dimensions differ");
  if (static_cast<Eigen::Index>(names.size()) != values.cols())
    throw ConfigError("name count does not match column count");
  for (Eigen::Index i = 0; i < rows(); ++i)
    for (Eigen::Index j = 0; j < cols(); ++j)
      if (!mask(i, j) && values(i, j) != 0.0)
        throw ConfigError("missing cell is not zero-filled at row " +
                          std::to_string(i + 1));
}

std::string to_string(PatternClass c) {
  switch (c) {
    case PatternClass::kComplete: return "complete";
    case PatternClass::kResponseOnly: return "response-only";
    case PatternClass::kComplementaryBivariate: return "complementary-bivariate";
    case PatternClass::kGeneralMultivariate: return "general-multivariate";
  }
  return "unknown";
}

MissingnessPattern validate(const Dataset& d) {
  d.check();
  const Eigen::Index n = d.rows(), p = d.cols();

  for (Eigen::Index i = 0; i < n; ++i) {
    bool any = false;
    for (Eigen::Index j = 0; j < p; ++j) any = any || d.mask(i, j);
    if (!any)
      throw ConfigError("row " + std::to_string(i + 1) +
                        " has no observed values; every observation needs at "
                        "least one measure");
  }

  MissingnessPattern pat;
  pat.missing_by_var.resize(static_cast<size_t>(p));
  pat.n_obs.resize(static_cast<size_t>(p));
  pat.n_missing.resize(static_cast<size_t>(p));
  Eigen::Index vars_with_missing = 0;
  for (Eigen::Index j = 0; j < p; ++j) {
    pat.missing_by_var[static_cast<size_t>(j)] = d.missing_rows(j);
    const auto nm =
        static_cast<Eigen::Index>(pat.missing_by_var[static_cast<size_t>(j)].size());
    pat.n_missing[static_cast<size_t>(j)] = nm;
    pat.n_obs[static_cast<size_t>(j)] = n - nm;
    pat.total_missing += nm;
    if (nm > 0) ++vars_with_missing;
  }
  pat.total_observed = n * p - pat.total_missing;

  if (vars_with_missing == 0) {
    pat.classification = PatternClass::kComplete;
  } else if (vars_with_missing == 1) {
    pat.classification = PatternClass::kResponseOnly;
  } else if (vars_with_missing == 2) {
    // complementary when the two variables are never missing together
    Eigen::Index a = -1, b = -1;
    for (Eigen::Index j = 0; j < p; ++j)
      if (pat.n_missing[static_cast<size_t>(j)] > 0) (a < 0 ? a : b) = j;
    bool overlap = false;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!d.mask(i, a) && !d.mask(i, b)) overlap = true;
    pat.classification = overlap ? PatternClass::kGeneralMultivariate
                                 : PatternClass::kComplementaryBivariate;
  } else {
    pat.classification = PatternClass::kGeneralMultivariate;
  }
  return pat;
}

Dataset load_csv(const std::string& path,
                 const std::set<std::string>& missing_tokens) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return load_csv(in, path, missing_tokens);
}

Dataset load_csv(std::istream& in, const std::string& origin,
                 const std::set<std::string>& missing_tokens) {
  std::string line;
  if (!std::getline(in, line))
    throw ParseError(origin + ": empty file, expected a header row");
  std::vector<std::string> names;
  for (auto& f : split_csv_line(line)) names.push_back(trim(f));
  const size_t p = names.size();

  std::vector<std::vector<double>> rows;
  std::vector<std::vector<bool>> masks;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != p)
      throw ParseError(origin + ": line " + std::to_string(lineno) + " has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(p));
    std::vector<double> vals(p, 0.0);
    std::vector<bool> obs(p, true);
    for (size_t j = 0; j < p; ++j) {
      std::string tok = trim(fields[j]);
      if (missing_tokens.count(tok)) {
        obs[j] = false;
        continue;
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw ParseError(origin + ": line " + std::to_string(lineno) +
                         ", field '" + names[j] + "': cannot parse '" + tok +
                         "' as a number");
      vals[j] = v;
    }
    rows.push_back(std::move(vals));
    masks.push_back(std::move(obs));
  }
  if (rows.empty()) throw ParseError(origin + ": no data rows");

  Dataset d;
  d.names = std::move(names);
  const auto n = static_cast<Eigen::Index>(rows.size());
  d.values.setZero(n, static_cast<Eigen::Index>(p));
  d.mask.setConstant(n, static_cast<Eigen::Index>(p), true);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(p); ++j) {
      d.values(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
      d.mask(i, j) = masks[static_cast<size_t>(i)][static_cast<size_t>(j)];
    }
  d.check();
  return d;
}

void write_csv(const Dataset& d, const std::string& path,
               const std::string& missing_token) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  write_csv(d, out, missing_token);
}

void write_csv(const Dataset& d, std::ostream& out,
               const std::string& missing_token) {
  for (size_t j = 0; j < d.names.size(); ++j)
    out << (j ? "," : "") << d.names[j];
  out << "\n";
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      if (j) out << ",";
      if (d.mask(i, j))
        out << d.values(i, j);
      else
        out << missing_token;
    }
    out << "\n";
  }
}

Dataset embedded_hald13() {
  // 13 observations of X1..X5; -1 marks a missing cell.
  static const double kData[13][5] = {
      {7, 26, 6, 60, 78.5},   {1, 29, 15, 52, 74.3}, {11, 56, 8, 20, 104.3},
      {11, 31, 8, 47, 87.6},  {7, 52, 6, 33, 95.9},  {11, 55, 9, 22, 109.2},
      {3, 71, 17, -1, 102.7}, {1, 31, 22, -1, 72.5}, {2, 54, 18, -1, 93.1},
      {-1, -1, 4, -1, 115.9}, {-1, -1, 23, -1, 83.8},
      {-1, -1, 9, -1, 113.3}, {-1, -1, 8, -1, 109.4}};
  static const bool kMissing[13][5] = {
      {false, false, false, false, false}, {false, false, false, false, false},
      {false, false, false, false, false}, {false, false, false, false, false},
      {false, false, false, false, false}, {false, false, false, false, false},
      {false, false, false, true, false},  {false, false, false, true, false},
      {false, false, false, true, false},  {true, true, false, true, false},
      {true, true, false, true, false},    {true, true, false, true, false},
      {true, true, false, true, false}};

  Dataset d;
  d.names = {"X1", "X2", "X3", "X4", "X5"};
  d.values.setZero(13, 5);
  d.mask.setConstant(13, 5, true);
  for (int i = 0; i < 13; ++i)
    for (int j = 0; j < 5; ++j) {
      if (kMissing[i][j]) {
        d.mask(i, j) = false;
      } else {
        d.values(i, j) = kData[i][j];
      }
    }
  return d;
}

}  // namespace regem
