#include "regem/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "regem/errors.hpp"
#include "regem/ols.hpp"

namespace regem {

namespace {

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index,
                          std::uint32_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32), salt};
  return std::mt19937_64(seq);
}

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  if (sorted.size() == 1) return sorted.front();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

}  // namespace

DrawSummary CellDraws::summary() const {
  DrawSummary s;
  if (draws.empty()) return s;
  const double n = static_cast<double>(draws.size());
  double sum = 0.0;
  for (double v : draws) sum += v;
  s.mean = sum / n;
  if (draws.size() > 1) {
    double ss = 0.0;
    for (double v : draws) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / (n - 1.0));
  }
  std::vector<double> sorted = draws;
  std::sort(sorted.begin(), sorted.end());
  s.p2_5 = quantile(sorted, 0.025);
  s.p50 = quantile(sorted, 0.5);
  s.p97_5 = quantile(sorted, 0.975);
  return s;
}

const CellDraws* ImputationDraws::find(const std::string& variable,
                                       Eigen::Index row) const {
  for (const auto& c : cells)
    if (c.variable == variable && c.row == row) return &c;
  return nullptr;
}

ImputationDraws multiple_impute(const ImputationSet& imp, int M,
                                std::uint64_t seed) {
  if (M < 1) throw ConfigError("M must be at least 1");
  ImputationDraws out;
  out.seed = seed;
  out.method = "normal-mi";
  out.attempted = out.accepted = M;
  for (size_t m = 0; m < imp.cells.size(); ++m) {
    const auto& cell = imp.cells[m];
    if (cell.error)
      throw ConfigError("cell " + cell.variable + "@" +
                        std::to_string(cell.row + 1) +
                        " carries an error and cannot be sampled");
    CellDraws cd;
    cd.row = cell.row;
    cd.variable = cell.variable;
    cd.draws.resize(static_cast<size_t>(M));
    if (cell.se > 0.0) {
      auto gen = substream(seed, static_cast<std::uint64_t>(m), 0x4d49u);
      std::normal_distribution<double> normal(cell.point, cell.se);
      for (auto& v : cd.draws) v = normal(gen);
    } else {
      std::fill(cd.draws.begin(), cd.draws.end(), cell.point);
    }
    out.cells.push_back(std::move(cd));
  }
  return out;
}

namespace {

struct ReplicateEstimates {
  // (variable column, original row) -> values observed in this replicate
  std::map<std::pair<Eigen::Index, Eigen::Index>, std::vector<double>> values;
};

Dataset resample(const Dataset& d, const std::vector<Eigen::Index>& picks) {
  Dataset r;
  r.names = d.names;
  r.values.resize(static_cast<Eigen::Index>(picks.size()), d.cols());
  r.mask.resize(static_cast<Eigen::Index>(picks.size()), d.cols());
  for (size_t s = 0; s < picks.size(); ++s) {
    r.values.row(static_cast<Eigen::Index>(s)) = d.values.row(picks[s]);
    r.mask.row(static_cast<Eigen::Index>(s)) = d.mask.row(picks[s]);
  }
  return r;
}

}  // namespace

ImputationDraws bootstrap_impute(const Dataset& d, const BootstrapOptions& opts,
                                 int B, std::uint64_t seed) {
  d.check();
  if (!opts.target_count && B < 1) throw ConfigError("B must be at least 1");
  if (opts.target_count && *opts.target_count < 1)
    throw ConfigError("target_count must be at least 1");

  const MissingnessPattern pattern = validate(d);
  if (pattern.total_missing == 0)
    throw ConfigError("dataset has no missing cells; nothing to impute");

  BootstrapEstimator estimator = opts.estimator;
  if (estimator == BootstrapEstimator::kAuto)
    estimator = pattern.classification == PatternClass::kResponseOnly
                    ? BootstrapEstimator::kClosedForm
                    : BootstrapEstimator::kNls;

  std::string response = opts.response;
  std::vector<std::string> predictors = opts.predictors;
  if (estimator == BootstrapEstimator::kClosedForm) {
    if (response.empty()) {
      if (pattern.classification != PatternClass::kResponseOnly)
        throw ConfigError(
            "closed-form bootstrap needs a response variable when the "
            "pattern is not response-only");
      for (Eigen::Index j = 0; j < d.cols(); ++j)
        if (pattern.n_missing[static_cast<size_t>(j)] > 0)
          response = d.names[static_cast<size_t>(j)];
    }
    if (predictors.empty())
      for (const auto& name : d.names)
        if (name != response) predictors.push_back(name);
  }

  // the original missing cells, in (variable, row) order
  std::vector<std::pair<Eigen::Index, Eigen::Index>> targets;
  for (Eigen::Index j = 0; j < d.cols(); ++j)
    for (Eigen::Index i = 0; i < d.rows(); ++i)
      if (!d.mask(i, j)) targets.emplace_back(j, i);
  std::map<std::pair<Eigen::Index, Eigen::Index>, size_t> target_index;
  for (size_t t = 0; t < targets.size(); ++t) target_index[targets[t]] = t;

  ImputationDraws out;
  out.seed = seed;
  out.method = "bootstrap";
  out.cells.resize(targets.size());
  for (size_t t = 0; t < targets.size(); ++t) {
    out.cells[t].variable = d.names[static_cast<size_t>(targets[t].first)];
    out.cells[t].row = targets[t].second;
  }

  const Eigen::Index n = d.rows();
  const long long cap =
      opts.target_count ? 1000LL + 100LL * *opts.target_count
                        : 20LL * static_cast<long long>(B) + 1000LL;

  auto done = [&]() {
    if (opts.target_count) {
      for (const auto& c : out.cells)
        if (static_cast<int>(c.draws.size()) < *opts.target_count) return false;
      return true;
    }
    return out.accepted >= B;
  };

  std::uint64_t attempt = 0;
  while (!done()) {
    if (out.attempted >= cap)
      throw ConfigError("bootstrap gave up after " +
                        std::to_string(out.attempted) +
                        " attempts without reaching the requested draws");
    auto gen = substream(seed, attempt++, 0x4253u);
    ++out.attempted;

    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    std::vector<Eigen::Index> picks(static_cast<size_t>(n));
    for (auto& s : picks) s = pick(gen);
    const Dataset boot = resample(d, picks);

    ReplicateEstimates est;
    bool ok = true;
    try {
      if (boot.mask.all()) {
        // a sample that drew no missing rows imputes nothing
      } else if (estimator == BootstrapEstimator::kClosedForm) {
        const ImputationSet imp = impute_closed_form(boot, response, predictors);
        const Eigen::Index yc = boot.column(response);
        for (const auto& cell : imp.cells)
          est.values[{yc, picks[static_cast<size_t>(cell.row)]}].push_back(cell.point);
      } else if (estimator == BootstrapEstimator::kTwoWay) {
        const ImputationSet imp = two_way_impute(boot);
        for (const auto& cell : imp.cells)
          est.values[{boot.column(cell.variable),
                      picks[static_cast<size_t>(cell.row)]}]
              .push_back(cell.point);
      } else {
        const ConcatenatedSystem sys = build_concatenated(boot);
        const NlsResult res = solve_concatenated(sys, {}, opts.nls);
        if (!res.converged) throw ConfigError("replicate did not converge");
        for (Eigen::Index c = 0; c < sys.cell_count(); ++c)
          est.values[{sys.cells[static_cast<size_t>(c)].variable,
                      picks[static_cast<size_t>(sys.cells[static_cast<size_t>(c)].row)]}]
              .push_back(res.cell_values(c));
      }
    } catch (const Error&) {
      ok = false;
    }

    if (ok && opts.min_valid) {
      for (const auto& [key, vals] : est.values)
        for (double v : vals)
          if (v < *opts.min_valid) ok = false;
    }

    if (ok) {
      ++out.accepted;
      for (const auto& [key, vals] : est.values) {
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        out.cells[target_index.at(key)].draws.push_back(mean);
      }
    } else {
      ++out.discarded;
    }

    if (out.attempted >= 20 &&
        out.discarded * 10 > out.attempted * 9)
      throw ConfigError(
          "bootstrap aborted: " + std::to_string(out.discarded) + " of " +
          std::to_string(out.attempted) +
          " replicates were discarded; the estimator cannot be refit on "
          "resampled data (too few complete rows or an infeasible minimum)");
  }
  return out;
}

ImputationSet two_way_impute(const Dataset& table) {
  table.check();
  const Eigen::Index n = table.rows(), p = table.cols();
  const Eigen::Index k = 1 + (n - 1) + (p - 1);

  std::vector<Eigen::Index> obs, mis;  // index = i*p + j
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      (table.mask(i, j) ? obs : mis).push_back(i * p + j);

  auto design_row = [&](Eigen::Index idx) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(k);
    const Eigen::Index i = idx / p, j = idx % p;
    x(0) = 1.0;
    if (i >= 1) x(i) = 1.0;              // row effects, slots 1..n-1
    if (j >= 1) x(n - 1 + j) = 1.0;      // column effects, slots n..n+p-2
    return x;
  };

  Eigen::MatrixXd X(static_cast<Eigen::Index>(obs.size()), k);
  Eigen::VectorXd y(static_cast<Eigen::Index>(obs.size()));
  for (size_t r = 0; r < obs.size(); ++r) {
    X.row(static_cast<Eigen::Index>(r)) = design_row(obs[r]);
    y(static_cast<Eigen::Index>(r)) = table.values(obs[r] / p, obs[r] % p);
  }

  ImputationSet out;
  out.fit = fit_ols(X, y);
  out.note =
      "additive row+column model: correlations between the variables are "
      "pushed into the error term and ignored; treat these imputations and "
      "their standard errors as misspecified";
  for (auto idx : mis) {
    const Eigen::VectorXd x0 = design_row(idx);
    ImputationCell cell;
    cell.row = idx / p;
    cell.variable = table.names[static_cast<size_t>(idx % p)];
    cell.point = x0.dot(out.fit.coefficients);
    cell.se = prediction_se(out.fit.sigma2_hat, leverage(out.fit, x0));
    out.cells.push_back(std::move(cell));
  }
  return out;
}

void write_draws_csv(const ImputationDraws& draws, std::ostream& out) {
  out << "variable,row,replicate,value\n";
  std::ostringstream line;
  line.precision(17);
  for (const auto& cell : draws.cells) {
    for (size_t r = 0; r < cell.draws.size(); ++r) {
      line.str("");
      line << cell.variable << "," << (cell.row + 1) << "," << (r + 1) << ","
           << cell.draws[r];
      out << line.str() << "\n";
    }
  }
}

std::string draws_summary_json(const ImputationDraws& draws) {
  using json = nlohmann::ordered_json;
  json doc;
  doc["method"] = draws.method;
  doc["seed"] = draws.seed;
  doc["attempted"] = draws.attempted;
  doc["accepted"] = draws.accepted;
  doc["discarded"] = draws.discarded;
  doc["cells"] = json::array();
  for (const auto& cell : draws.cells) {
    const DrawSummary s = cell.summary();
    doc["cells"].push_back({{"variable", cell.variable},
                            {"row", cell.row + 1},
                            {"count", cell.draws.size()},
                            {"mean", s.mean},
                            {"sd", s.sd},
                            {"p2.5", s.p2_5},
                            {"p50", s.p50},
                            {"p97.5", s.p97_5}});
  }
  return doc.dump(2);
}

}  // namespace regem
