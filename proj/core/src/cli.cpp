#include "regem/cli.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "log.hpp"
#include "regem/constraints.hpp"
#include "regem/dataset.hpp"
#include "regem/em.hpp"
#include "regem/errors.hpp"
#include "regem/nls.hpp"
#include "regem/uncertainty.hpp"

namespace regem::cli {

using json = nlohmann::ordered_json;

namespace {

json num(double v) {
  if (std::isnan(v) || std::isinf(v)) return nullptr;
  return json(v);
}

Method method_or_throw(const std::string& name) {
  if (name == "closed-form") return Method::kClosedForm;
  if (name == "em") return Method::kEm;
  if (name == "nls") return Method::kNls;
  if (name == "constrained") return Method::kConstrained;
  if (name == "two-way") return Method::kTwoWay;
  if (name == "bootstrap") return Method::kBootstrap;
  if (name == "mi") return Method::kMi;
  throw ConfigError("unknown method '" + name +
                    "' (expected closed-form, em, nls, constrained, two-way, "
                    "bootstrap or mi)");
}

bool needs_response(Method m) {
  return m == Method::kClosedForm || m == Method::kEm || m == Method::kMi;
}

bool is_stochastic(Method m) {
  return m == Method::kBootstrap || m == Method::kMi;
}

std::vector<std::string> resolve_predictors(const Dataset& d,
                                            const RunConfig& cfg) {
  if (!cfg.predictors.empty()) return cfg.predictors;
  std::vector<std::string> preds;
  for (const auto& name : d.names)
    if (name != cfg.response) preds.push_back(name);
  return preds;
}

std::optional<Eigen::VectorXd> parse_init(const std::string& text,
                                          Eigen::Index k) {
  if (text.empty() || text == "complete-case") return std::nullopt;
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      vals.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("cannot parse init value '" + tok + "'");
    }
  }
  if (static_cast<Eigen::Index>(vals.size()) != k)
    throw ConfigError("init has " + std::to_string(vals.size()) +
                      " values, the model has " + std::to_string(k) +
                      " coefficients");
  Eigen::VectorXd v(k);
  for (Eigen::Index i = 0; i < k; ++i) v(i) = vals[static_cast<size_t>(i)];
  return v;
}

json cells_from_imputation_set(const ImputationSet& imp) {
  json arr = json::array();
  for (const auto& c : imp.cells) {
    json item;
    item["variable"] = c.variable;
    item["row"] = c.row + 1;
    item["point"] = num(c.point);
    item["se"] = num(c.se);
    if (c.error) item["error"] = *c.error;
    arr.push_back(item);
  }
  return arr;
}

json coefficients_json(const OlsFit& fit,
                       const std::vector<std::string>& predictors) {
  json c;
  c["intercept"] = fit.coefficients(0);
  json slopes = json::object();
  for (size_t i = 0; i < predictors.size(); ++i)
    slopes[predictors[i]] = fit.coefficients(1 + static_cast<Eigen::Index>(i));
  c["slopes"] = slopes;
  c["sigma2_hat"] = fit.sigma2_hat;
  c["df"] = fit.df;
  c["sse"] = fit.sse;
  return c;
}

json nls_report_body(const ConcatenatedSystem& sys, const NlsResult& res,
                     const std::string& df_convention) {
  json body;
  json eqs = json::array();
  for (Eigen::Index b = 0; b < sys.blocks(); ++b) {
    const Eigen::Index v = sys.equation_vars[static_cast<size_t>(b)];
    const Eigen::Index base = b * sys.p();
    json eq;
    eq["response"] = sys.names[static_cast<size_t>(v)];
    eq["intercept"] = res.coefficients(base);
    json slopes = json::object();
    Eigen::Index s = 1;
    for (Eigen::Index u = 0; u < sys.p(); ++u) {
      if (u == v) continue;
      slopes[sys.names[static_cast<size_t>(u)]] = res.coefficients(base + s++);
    }
    eq["slopes"] = slopes;
    eqs.push_back(eq);
  }
  body["coefficients"] = eqs;

  json cells = json::array();
  for (Eigen::Index c = 0; c < sys.cell_count(); ++c) {
    const auto& ref = sys.cells[static_cast<size_t>(c)];
    json item;
    item["variable"] = sys.names[static_cast<size_t>(ref.variable)];
    item["row"] = ref.row + 1;
    item["point"] = num(res.cell_values(c));
    const double se_raw = res.cell_se_raw.size() ? res.cell_se_raw(c)
                                                 : std::numeric_limits<double>::quiet_NaN();
    const double se_adj = res.cell_se_adjusted.size()
                              ? res.cell_se_adjusted(c)
                              : std::numeric_limits<double>::quiet_NaN();
    item["se"] = df_convention == "adjusted" ? num(se_adj) : num(se_raw);
    item["se_raw"] = num(se_raw);
    item["se_adjusted"] = num(se_adj);
    item["at_bound"] = !res.cell_at_bound.empty() &&
                       res.cell_at_bound[static_cast<size_t>(c)] != 0;
    cells.push_back(item);
  }
  body["cells"] = cells;
  body["convergence"] = {{"converged", res.converged},
                         {"iterations", res.iterations},
                         {"sse", res.sse},
                         {"df_raw", res.df_raw},
                         {"df_adjusted", res.df_adjusted},
                         {"se_available", res.se_available}};
  return body;
}

json draws_block(const ImputationDraws& draws) {
  json block;
  block["attempted"] = draws.attempted;
  block["accepted"] = draws.accepted;
  block["discarded"] = draws.discarded;
  json cells = json::array();
  for (const auto& cell : draws.cells) {
    const DrawSummary s = cell.summary();
    cells.push_back({{"variable", cell.variable},
                     {"row", cell.row + 1},
                     {"count", cell.draws.size()},
                     {"mean", num(s.mean)},
                     {"sd", num(s.sd)},
                     {"p2.5", num(s.p2_5)},
                     {"p50", num(s.p50)},
                     {"p97.5", num(s.p97_5)}});
  }
  block["cells"] = cells;
  return block;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << text;
}

}  // namespace

Method parse_method(const std::string& name) { return method_or_throw(name); }

std::string to_string(Method m) {
  switch (m) {
    case Method::kClosedForm: return "closed-form";
    case Method::kEm: return "em";
    case Method::kNls: return "nls";
    case Method::kConstrained: return "constrained";
    case Method::kTwoWay: return "two-way";
    case Method::kBootstrap: return "bootstrap";
    case Method::kMi: return "mi";
  }
  return "unknown";
}

void RunConfig::validate() const {
  if (input.empty()) throw ConfigError("--input is required");
  if (out.empty()) throw ConfigError("--out is required");
  if (needs_response(method) && response.empty())
    throw ConfigError("--response is required for method " + to_string(method));
  if (method == Method::kConstrained && constraints_path.empty())
    throw ConfigError("--constraints is required for method constrained");
  if (is_stochastic(method) && !seed)
    throw ConfigError("--seed is required for method " + to_string(method));
  if (method == Method::kBootstrap && !B)
    throw ConfigError("--B is required for method bootstrap");
  if (method == Method::kMi && !M)
    throw ConfigError("--M is required for method mi");
  if (B && *B < 1) throw ConfigError("--B must be at least 1");
  if (M && *M < 1) throw ConfigError("--M must be at least 1");
  if (tol && !(*tol > 0.0)) throw ConfigError("--tol must be positive");
  if (max_iter && *max_iter < 1) throw ConfigError("--max-iter must be at least 1");
  if (df_convention != "raw" && df_convention != "adjusted" &&
      df_convention != "both")
    throw ConfigError("--df-convention must be raw, adjusted or both");
  if (!trace_out.empty() && method != Method::kEm)
    throw ConfigError("--trace-out is only produced by the em method");
  if (!draws_out.empty() && !is_stochastic(method))
    throw ConfigError("--draws-out needs a stochastic method (bootstrap, mi)");
  if (min_valid && method != Method::kBootstrap)
    throw ConfigError("--min-valid applies to the bootstrap only");
  if (init != "complete-case" && method != Method::kEm)
    throw ConfigError("--init applies to the em method only");
}

void run(const RunConfig& cfg) {
  cfg.validate();
  const Dataset d = load_csv(cfg.input, cfg.missing_tokens);
  const MissingnessPattern pattern = validate(d);

  const double default_tol = cfg.method == Method::kEm ? 1e-10 : 1e-12;
  const double tol = cfg.tol.value_or(default_tol);
  const int max_iter = cfg.max_iter.value_or(500);

  json doc;
  doc["schema"] = 1;
  doc["method"] = to_string(cfg.method);
  doc["input"] = cfg.input;

  json params;
  params["response"] = cfg.response.empty() ? json(nullptr) : json(cfg.response);
  if (needs_response(cfg.method))
    params["predictors"] = resolve_predictors(d, cfg);
  else
    params["predictors"] = nullptr;
  params["tol"] = tol;
  params["max_iter"] = max_iter;
  params["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
  params["B"] = cfg.B ? json(*cfg.B) : json(nullptr);
  params["M"] = cfg.M ? json(*cfg.M) : json(nullptr);
  params["min_valid"] = cfg.min_valid ? json(*cfg.min_valid) : json(nullptr);
  params["init"] = cfg.method == Method::kEm ? json(cfg.init) : json(nullptr);
  params["constraints"] = cfg.constraints_path.empty()
                              ? json(nullptr)
                              : json(cfg.constraints_path);
  params["df_convention"] = cfg.df_convention;
  params["missing_tokens"] = cfg.missing_tokens;
  doc["parameters"] = params;

  doc["pattern"] = {{"n", d.rows()},
                    {"p", d.cols()},
                    {"classification", to_string(pattern.classification)},
                    {"observed_cells", pattern.total_observed},
                    {"missing_cells", pattern.total_missing}};

  switch (cfg.method) {
    case Method::kClosedForm: {
      const auto predictors = resolve_predictors(d, cfg);
      const ImputationSet imp = impute_closed_form(d, cfg.response, predictors);
      doc["coefficients"] = coefficients_json(imp.fit, predictors);
      doc["cells"] = cells_from_imputation_set(imp);
      doc["convergence"] = nullptr;
      break;
    }
    case Method::kEm: {
      const auto predictors = resolve_predictors(d, cfg);
      EmOptions opts;
      opts.tol = tol;
      opts.max_iter = max_iter;
      opts.init = parse_init(cfg.init,
                             1 + static_cast<Eigen::Index>(predictors.size()));
      const EmResult res = run_em(d, cfg.response, predictors, opts);
      doc["coefficients"] = coefficients_json(res.fit, predictors);
      doc["cells"] = cells_from_imputation_set(res.imputations);
      doc["convergence"] = {{"converged", res.trace.converged},
                            {"iterations", res.trace.final_tau},
                            {"sse", res.trace.iterations.back().sse}};
      if (!cfg.trace_out.empty()) {
        std::ostringstream ss;
        write_trace_csv(res.trace, ss);
        write_text(cfg.trace_out, ss.str());
      }
      break;
    }
    case Method::kNls: {
      const ConcatenatedSystem sys = build_concatenated(d);
      NlsOptions opts;
      opts.tol = tol;
      opts.max_iter = max_iter;
      const NlsResult res = solve_concatenated(sys, {}, opts);
      doc.update(nls_report_body(sys, res, cfg.df_convention));
      break;
    }
    case Method::kConstrained: {
      const ConcatenatedSystem sys = build_concatenated(d);
      const ConstraintSpec spec = ConstraintSpec::from_json_file(cfg.constraints_path);
      NlsOptions opts;
      opts.tol = tol;
      opts.max_iter = max_iter;
      const NlsResult res = constrained_nls(sys, spec, opts);
      doc.update(nls_report_body(sys, res, cfg.df_convention));
      json modes = json::object();
      for (const auto& [name, vc] : spec.variables) {
        json m;
        m["mode"] = to_string(vc.mode);
        if (vc.total) m["total"] = *vc.total;
        if (vc.preserve_mean) m["preserve_mean"] = true;
        modes[name] = m;
      }
      doc["constraints"] = {{"variables", modes},
                            {"bounds", spec.bounds.size()}};
      break;
    }
    case Method::kTwoWay: {
      const ImputationSet imp = two_way_impute(d);
      doc["note"] = imp.note;
      doc["cells"] = cells_from_imputation_set(imp);
      doc["convergence"] = nullptr;
      break;
    }
    case Method::kBootstrap: {
      BootstrapOptions opts;
      opts.response = cfg.response;
      opts.predictors = cfg.predictors;
      opts.min_valid = cfg.min_valid;
      opts.nls.tol = tol;
      opts.nls.max_iter = max_iter;
      const ImputationDraws draws = bootstrap_impute(d, opts, *cfg.B, *cfg.seed);
      json cells = json::array();
      for (const auto& cell : draws.cells) {
        const DrawSummary s = cell.summary();
        cells.push_back({{"variable", cell.variable},
                         {"row", cell.row + 1},
                         {"point", num(s.mean)},
                         {"se", num(s.sd)},
                         {"count", cell.draws.size()}});
      }
      doc["cells"] = cells;
      doc["draws"] = draws_block(draws);
      doc["convergence"] = nullptr;
      if (!cfg.draws_out.empty()) {
        std::ostringstream ss;
        write_draws_csv(draws, ss);
        write_text(cfg.draws_out, ss.str());
      }
      break;
    }
    case Method::kMi: {
      const auto predictors = resolve_predictors(d, cfg);
      const ImputationSet imp = impute_closed_form(d, cfg.response, predictors);
      const ImputationDraws draws = multiple_impute(imp, *cfg.M, *cfg.seed);
      doc["coefficients"] = coefficients_json(imp.fit, predictors);
      doc["cells"] = cells_from_imputation_set(imp);
      doc["draws"] = draws_block(draws);
      doc["convergence"] = nullptr;
      if (!cfg.draws_out.empty()) {
        std::ostringstream ss;
        write_draws_csv(draws, ss);
        write_text(cfg.draws_out, ss.str());
      }
      break;
    }
  }

  write_text(cfg.out, doc.dump(2) + "\n");
  if (detail::log_level() >= detail::LogLevel::kInfo)
    detail::log("run method=" + to_string(cfg.method) + " input=" + cfg.input +
                " out=" + cfg.out);
}

void compare(const std::vector<std::string>& report_paths,
             const std::string& out_csv) {
  if (report_paths.size() < 2)
    throw ConfigError("compare needs at least two reports");

  struct Entry {
    std::string method;
    std::vector<std::tuple<std::string, Eigen::Index, double, double>> cells;
  };
  std::vector<Entry> entries;
  for (const auto& path : report_paths) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open report '" + path + "'");
    json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ": " + e.what());
    }
    Entry entry;
    entry.method = doc.value("method", std::string("unknown"));
    if (!doc.contains("cells"))
      throw ParseError(path + ": report has no cells array");
    for (const auto& c : doc["cells"]) {
      const double point = c["point"].is_null()
                               ? std::numeric_limits<double>::quiet_NaN()
                               : c["point"].get<double>();
      const double se = (!c.contains("se") || c["se"].is_null())
                            ? std::numeric_limits<double>::quiet_NaN()
                            : c["se"].get<double>();
      entry.cells.emplace_back(c["variable"].get<std::string>(),
                               c["row"].get<Eigen::Index>(), point, se);
    }
    entries.push_back(std::move(entry));
  }

  auto key_set = [](const Entry& e) {
    std::vector<std::pair<std::string, Eigen::Index>> keys;
    for (const auto& [v, r, p, s] : e.cells) keys.emplace_back(v, r);
    std::sort(keys.begin(), keys.end());
    return keys;
  };
  const auto base_keys = key_set(entries.front());
  for (size_t i = 1; i < entries.size(); ++i)
    if (key_set(entries[i]) != base_keys)
      throw ConfigError("reports cover different cell sets; compare needs "
                        "runs over the same dataset");

  std::ofstream out(out_csv, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + out_csv + "' for writing");
  out << "variable,row,method,point,se\n";
  std::ostringstream line;
  line.precision(17);
  for (const auto& entry : entries) {
    for (const auto& [v, r, p, s] : entry.cells) {
      line.str("");
      line << v << "," << r << "," << entry.method << ",";
      if (std::isnan(p)) line << ""; else line << p;
      line << ",";
      if (std::isnan(s)) line << ""; else line << s;
      out << line.str() << "\n";
    }
  }
}

std::string error_json(const std::exception& e) {
  std::string type = "error";
  if (dynamic_cast<const ParseError*>(&e)) type = "parse";
  else if (dynamic_cast<const SingularError*>(&e)) type = "singular";
  else if (dynamic_cast<const ConfigError*>(&e)) type = "config";
  json doc;
  doc["schema"] = 1;
  doc["error"] = {{"type", type}, {"message", e.what()}};
  return doc.dump(2) + "\n";
}

}  // namespace regem::cli
