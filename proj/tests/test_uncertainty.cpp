#include "regem/uncertainty.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "regem/closed_form.hpp"
#include "regem/errors.hpp"
#include "support/hald_expected.hpp"
#include "support/test_util.hpp"

using namespace regem;

TEST_CASE("zero-se cells draw a constant") {
  const auto d = test::make_dataset(
      {"Y", "X"}, {{2, 1}, {4, 2}, {6, 3}, {NAN, 4}});
  const ImputationSet imp = impute_closed_form(d, "Y", {"X"});
  const ImputationDraws draws = multiple_impute(imp, 50, 7);
  REQUIRE(draws.cells.size() == 1);
  for (double v : draws.cells[0].draws) CHECK(v == doctest::Approx(8.0));
  CHECK(draws.cells[0].summary().sd == doctest::Approx(0.0));
}

TEST_CASE("normal draws converge to the analytic mean and sd") {
  const auto d = test::make_dataset(
      {"Y", "X"}, {{0, 0}, {2, 1}, {1, 2}, {NAN, 3}});
  const ImputationSet imp = impute_closed_form(d, "Y", {"X"});
  const int M = 100000;
  const ImputationDraws draws = multiple_impute(imp, M, 20260810);
  const DrawSummary s = draws.cells[0].summary();
  const double se = std::sqrt(5.0);
  // 3 monte-carlo standard errors around the target mean, 2% on the sd
  CHECK(std::abs(s.mean - 2.0) < 3.0 * se / std::sqrt(static_cast<double>(M)));
  CHECK(std::abs(s.sd - se) < 0.02 * se);
}

TEST_CASE("multiple imputation is deterministic in the seed") {
  const auto inst = test::random_response_only(515);
  const ImputationSet imp =
      impute_closed_form(inst.data, inst.response, inst.predictors);
  const ImputationDraws a = multiple_impute(imp, 64, 99);
  const ImputationDraws b = multiple_impute(imp, 64, 99);
  const ImputationDraws c = multiple_impute(imp, 64, 100);
  REQUIRE(a.cells.size() == b.cells.size());
  bool all_equal = true, any_differs_from_c = false;
  for (size_t m = 0; m < a.cells.size(); ++m) {
    all_equal = all_equal && a.cells[m].draws == b.cells[m].draws;
    any_differs_from_c = any_differs_from_c || a.cells[m].draws != c.cells[m].draws;
  }
  CHECK(all_equal);
  CHECK(any_differs_from_c);
  CHECK_THROWS_AS(multiple_impute(imp, 0, 1), ConfigError);
}

TEST_CASE("draws csv and summary json") {
  const auto d = test::make_dataset(
      {"Y", "X"}, {{0, 0}, {2, 1}, {1, 2}, {NAN, 3}});
  const ImputationSet imp = impute_closed_form(d, "Y", {"X"});
  const ImputationDraws draws = multiple_impute(imp, 3, 5);
  std::ostringstream out;
  write_draws_csv(draws, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "variable,row,replicate,value");
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 3);
  const std::string summary = draws_summary_json(draws);
  CHECK(summary.find("\"normal-mi\"") != std::string::npos);
  CHECK(summary.find("\"p2.5\"") != std::string::npos);
}

TEST_CASE("bootstrap determinism and accounting") {
  const auto inst = test::random_response_only(808);
  BootstrapOptions opts;
  const ImputationDraws a = bootstrap_impute(inst.data, opts, 25, 4242);
  const ImputationDraws b = bootstrap_impute(inst.data, opts, 25, 4242);
  CHECK(a.accepted == 25);
  CHECK(a.attempted == a.accepted + a.discarded);
  REQUIRE(a.cells.size() == b.cells.size());
  for (size_t m = 0; m < a.cells.size(); ++m)
    CHECK(a.cells[m].draws == b.cells[m].draws);

  SUBCASE("a single replicate is reproducible") {
    const ImputationDraws one = bootstrap_impute(inst.data, opts, 1, 7);
    const ImputationDraws two = bootstrap_impute(inst.data, opts, 1, 7);
    CHECK(one.accepted == 1);
    REQUIRE(one.cells.size() == two.cells.size());
    for (size_t m = 0; m < one.cells.size(); ++m)
      CHECK(one.cells[m].draws == two.cells[m].draws);
  }
}

TEST_CASE("per-cell draw counts follow the row inclusion probability") {
  // one missing cell in a 20-row set: a replicate includes that row with
  // probability 1 - (19/20)^20 = 0.6415
  std::vector<std::vector<double>> rows;
  std::mt19937 gen(13);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < 20; ++i)
    rows.push_back({1.0 + 0.5 * i + 0.3 * normal(gen), static_cast<double>(i)});
  rows[5][0] = NAN;
  const auto d = test::make_dataset({"Y", "X"}, rows);

  BootstrapOptions opts;
  const int B = 1000;
  const ImputationDraws draws = bootstrap_impute(d, opts, B, 11);
  REQUIRE(draws.cells.size() == 1);
  const double p = 1.0 - std::pow(19.0 / 20.0, 20.0);
  const double mc_sd = std::sqrt(B * p * (1.0 - p));
  CHECK(std::abs(static_cast<double>(draws.cells[0].draws.size()) - B * p) <
        3.0 * mc_sd);
}

TEST_CASE("bootstrap means track the closed-form points") {
  const auto inst = test::random_response_only(909);
  BootstrapOptions opts;
  const int B = 600;
  const ImputationDraws draws = bootstrap_impute(inst.data, opts, B, 3);
  const ImputationSet cc =
      impute_closed_form(inst.data, inst.response, inst.predictors);
  for (const auto& cell : cc.cells) {
    const CellDraws* cd = draws.find(inst.response, cell.row);
    REQUIRE(cd != nullptr);
    REQUIRE(cd->draws.size() > 50);
    const DrawSummary s = cd->summary();
    const double mc_se = s.sd / std::sqrt(static_cast<double>(cd->draws.size()));
    CHECK(std::abs(s.mean - cell.point) < 3.5 * mc_se + 1e-9);
  }
}

TEST_CASE("min_valid discards and redraws replicates") {
  const auto inst = test::random_response_only(606);
  BootstrapOptions opts;
  // a threshold just below the closed-form point discards some replicates
  const ImputationSet cc =
      impute_closed_form(inst.data, inst.response, inst.predictors);
  double lo = cc.cells[0].point;
  for (const auto& c : cc.cells) lo = std::min(lo, c.point);
  opts.min_valid = lo - 0.5;
  const ImputationDraws draws = bootstrap_impute(inst.data, opts, 30, 21);
  CHECK(draws.accepted == 30);
  CHECK(draws.attempted == draws.accepted + draws.discarded);
  for (const auto& cell : draws.cells)
    for (double v : cell.draws) CHECK(v >= *opts.min_valid);
}

TEST_CASE("an impossible minimum aborts with a diagnostic") {
  const auto inst = test::random_response_only(321);
  BootstrapOptions opts;
  opts.min_valid = 1e9;
  CHECK_THROWS_WITH_AS(bootstrap_impute(inst.data, opts, 10, 5),
                       doctest::Contains("discarded"), ConfigError);
}

TEST_CASE("target count mode tops up every cell") {
  const auto inst = test::random_response_only(117);
  BootstrapOptions opts;
  opts.target_count = 40;
  const ImputationDraws draws = bootstrap_impute(inst.data, opts, 0, 9);
  for (const auto& cell : draws.cells)
    CHECK(cell.draws.size() >= 40);
}

TEST_CASE("bootstrap on a complete dataset is rejected") {
  const auto d = test::make_dataset({"A", "B"}, {{1, 2}, {3, 4}, {5, 6}});
  BootstrapOptions opts;
  CHECK_THROWS_AS(bootstrap_impute(d, opts, 5, 1), ConfigError);
}

TEST_CASE("two-way model on an exactly additive table") {
  const auto d = test::make_dataset(
      {"C1", "C2", "C3"}, {{1, 2, 3}, {3, 4, NAN}});
  const ImputationSet imp = two_way_impute(d);
  REQUIRE(imp.cells.size() == 1);
  CHECK(imp.cells[0].point == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(imp.cells[0].variable == "C3");
  CHECK(imp.cells[0].row == 1);
  CHECK_FALSE(imp.note.empty());
}

TEST_CASE("two-way model with nothing missing returns an empty set") {
  const auto d = test::make_dataset({"A", "B"}, {{1, 2}, {3, 4}, {5, 7}});
  CHECK(two_way_impute(d).cells.empty());
}

TEST_CASE("exactly additive tables are reproduced cell for cell") {
  for (unsigned trial = 0; trial < 10; ++trial) {
    Dataset d = test::additive_table(2200 + trial, 5, 4, 3, 0.0);
    Dataset truth = d;
    const ImputationSet imp = two_way_impute(d);
    for (const auto& cell : imp.cells) {
      // recompute the punched-out additive value from the generator's truth:
      // the table was exactly additive, so any row/col pair recovers it
      const Eigen::Index j = d.column(cell.variable);
      Eigen::Index i2 = -1, j2 = -1;
      for (Eigen::Index r = 0; r < d.rows() && i2 < 0; ++r)
        if (r != cell.row && d.mask(r, j)) i2 = r;
      for (Eigen::Index c = 0; c < d.cols() && j2 < 0; ++c)
        if (c != j && d.mask(cell.row, c) && d.mask(i2, c)) j2 = c;
      REQUIRE(i2 >= 0);
      REQUIRE(j2 >= 0);
      const double expect =
          d.values(cell.row, j2) + d.values(i2, j) - d.values(i2, j2);
      CHECK(cell.point == doctest::Approx(expect).epsilon(1e-8));
      CHECK(cell.se == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("noisy additive tables match the augmented OLS oracle") {
  for (unsigned trial = 0; trial < 6; ++trial) {
    const Dataset d = test::additive_table(3300 + trial, 4, 3, 2, 0.7);
    const ImputationSet imp = two_way_impute(d);

    // independent route: concatenate by hand and solve the augmented system
    const Eigen::Index n = d.rows(), p = d.cols();
    Dataset flat;
    flat.names = {"Y"};
    for (Eigen::Index r = 1; r < n; ++r) flat.names.push_back("R" + std::to_string(r));
    for (Eigen::Index c = 1; c < p; ++c) flat.names.push_back("C" + std::to_string(c));
    flat.values.setZero(n * p, 1 + (n - 1) + (p - 1));
    flat.mask.setConstant(n * p, 1 + (n - 1) + (p - 1), true);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < p; ++j) {
        const Eigen::Index idx = i * p + j;
        flat.values(idx, 0) = d.values(i, j);
        flat.mask(idx, 0) = d.mask(i, j);
        if (i >= 1) flat.values(idx, i) = 1.0;
        if (j >= 1) flat.values(idx, n - 1 + j) = 1.0;
      }
    std::vector<std::string> preds(flat.names.begin() + 1, flat.names.end());
    const AugmentedSolution aug =
        solve_augmented_ols(build_ancova(flat, "Y", preds));

    REQUIRE(static_cast<Eigen::Index>(imp.cells.size()) == aug.b_missing.size());
    // both cell orders walk the table row-major
    for (size_t m = 0; m < imp.cells.size(); ++m) {
      CHECK(imp.cells[m].point ==
            doctest::Approx(aug.b_missing(static_cast<Eigen::Index>(m))).epsilon(1e-9));
      CHECK(imp.cells[m].se ==
            doctest::Approx(aug.se_missing(static_cast<Eigen::Index>(m))).epsilon(1e-9));
    }
  }
}

TEST_CASE("two-way reduction reproduces the published fixture column") {
  const Dataset d = embedded_hald13();
  const ImputationSet imp = two_way_impute(d);
  REQUIRE(imp.cells.size() == 15);
  for (const auto& [key, want] : test::hald_two_way()) {
    const ImputationCell* cell = imp.find(key.first, key.second - 1);
    REQUIRE(cell != nullptr);
    CHECK(std::abs(cell->point - want) < 1e-3);
  }
  for (const auto& [key, want] : test::hald_two_way_se()) {
    const ImputationCell* cell = imp.find(key.first, key.second - 1);
    CHECK(std::abs(cell->se - want) < 1e-3);
  }
}
