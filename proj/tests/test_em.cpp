#include "regem/em.hpp"

#include <doctest.h>

#include <sstream>

#include "regem/closed_form.hpp"
#include "regem/errors.hpp"
#include "support/test_util.hpp"

using namespace regem;

namespace {

const std::vector<std::vector<double>> kWorked = {
    {0, 0}, {2, 1}, {1, 2}, {NAN, 3}};

}  // namespace

TEST_CASE("complete-case start converges at tau 0 with a single trace row") {
  const auto d = test::make_dataset({"Y", "X"}, kWorked);
  const EmResult res = run_em(d, "Y", {"X"});
  CHECK(res.trace.converged);
  CHECK(res.trace.final_tau == 0);
  CHECK(res.trace.iterations.size() == 1);
  CHECK(res.imputations.cells.size() == 1);
  CHECK(res.imputations.cells[0].point == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("zero start walks to the complete-case limit") {
  const auto d = test::make_dataset({"Y", "X"}, kWorked);
  EmOptions opts;
  opts.init = Eigen::Vector2d(0.0, 0.0);
  const EmResult res = run_em(d, "Y", {"X"}, opts);
  CHECK(res.trace.converged);
  CHECK(res.trace.final_tau >= 1);
  const auto& last = res.trace.iterations.back();
  CHECK(last.coefficients(0) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(last.coefficients(1) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(res.imputations.cells[0].point == doctest::Approx(2.0).epsilon(1e-8));
  // the se still comes from the complete-case fit
  CHECK(res.imputations.cells[0].se == doctest::Approx(std::sqrt(5.0)).epsilon(1e-8));
}

TEST_CASE("no missing data: immediate convergence, fit equals plain ols") {
  const auto d = test::make_dataset({"Y", "X"}, {{0, 0}, {2, 1}, {1, 2}});
  const EmResult res = run_em(d, "Y", {"X"});
  CHECK(res.trace.converged);
  CHECK(res.trace.iterations.size() == 1);
  CHECK(res.imputations.cells.empty());
  CHECK(res.fit.coefficients(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(res.fit.coefficients(1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("em_step holds the complete-case fit fixed") {
  const auto d = test::make_dataset({"Y", "X"}, kWorked);
  const ImputationSet cc = impute_closed_form(d, "Y", {"X"});
  const OlsFit next = em_step(d, "Y", {"X"}, cc.fit.coefficients);
  CHECK((next.coefficients - cc.fit.coefficients).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("stepping from zeros descends and reaches the limit") {
  const auto d = test::make_dataset({"Y", "X"}, kWorked);
  // hand-computable first refit on the zero-filled data (0,0),(2,1),(1,2),(0,3):
  // slope -0.1, intercept 0.9
  const OlsFit step1 = em_step(d, "Y", {"X"}, Eigen::Vector2d(0.0, 0.0));
  CHECK(step1.coefficients(0) == doctest::Approx(0.9).epsilon(1e-10));
  CHECK(step1.coefficients(1) == doctest::Approx(-0.1).epsilon(1e-10));

  // iterating the step converges to the complete-case coefficients
  Eigen::VectorXd b = step1.coefficients;
  double prev_sse = step1.sse;
  for (int t = 0; t < 400; ++t) {
    const OlsFit next = em_step(d, "Y", {"X"}, b);
    CHECK(next.sse <= prev_sse + 1e-12);  // completed-data fit never worsens
    prev_sse = next.sse;
    b = next.coefficients;
  }
  CHECK(b(0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(b(1) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("successive steps after convergence differ below tolerance") {
  const auto d = test::make_dataset({"Y", "X"}, kWorked);
  const EmResult res = run_em(d, "Y", {"X"});
  const OlsFit again = em_step(d, "Y", {"X"}, res.fit.coefficients);
  const OlsFit once_more = em_step(d, "Y", {"X"}, again.coefficients);
  CHECK((once_more.coefficients - again.coefficients).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("trace sse and neg2ll are nonincreasing") {
  for (unsigned trial = 0; trial < 20; ++trial) {
    const auto inst = test::random_response_only(3000 + trial);
    EmOptions opts;
    opts.init = Eigen::VectorXd::Zero(inst.k);
    const EmResult res = run_em(inst.data, inst.response, inst.predictors, opts);
    const auto& iters = res.trace.iterations;
    for (size_t t = 0; t + 1 < iters.size(); ++t) {
      CHECK(iters[t + 1].sse <= iters[t].sse + 1e-12);
      CHECK(iters[t + 1].neg2ll <= iters[t].neg2ll + 1e-9);
      CHECK(iters[t + 1].tau == iters[t].tau + 1);
    }
  }
}

TEST_CASE("em limit equals the complete-case fit on 100 random instances") {
  for (unsigned trial = 0; trial < 100; ++trial) {
    const auto inst = test::random_response_only(5000 + trial);
    EmOptions opts;
    opts.init = Eigen::VectorXd::Zero(inst.k);
    opts.max_iter = 5000;
    const EmResult res = run_em(inst.data, inst.response, inst.predictors, opts);
    REQUIRE(res.trace.converged);
    const ImputationSet cc =
        impute_closed_form(inst.data, inst.response, inst.predictors);
    const auto& last = res.trace.iterations.back().coefficients;
    CHECK((last - cc.fit.coefficients).cwiseAbs().maxCoeff() < 1e-8);
    REQUIRE(res.imputations.cells.size() == cc.cells.size());
    for (size_t m = 0; m < cc.cells.size(); ++m)
      CHECK(std::abs(res.imputations.cells[m].point - cc.cells[m].point) < 1e-8);
  }
}

TEST_CASE("iteration cap reports non-convergence honestly") {
  const auto inst = test::random_response_only(8080);
  EmOptions opts;
  opts.init = Eigen::VectorXd::Constant(inst.k, 100.0);
  opts.max_iter = 1;
  opts.tol = 1e-15;
  const EmResult res = run_em(inst.data, inst.response, inst.predictors, opts);
  CHECK_FALSE(res.trace.converged);
  CHECK(res.trace.iterations.size() == 2);  // tau 0 and tau 1
}

TEST_CASE("missing predictors are rejected") {
  const auto d = test::make_dataset(
      {"Y", "X"}, {{1, 2}, {2, NAN}, {3, 4}, {NAN, 5}});
  CHECK_THROWS_AS(run_em(d, "Y", {"X"}), ConfigError);
}

TEST_CASE("trace csv layout") {
  const auto d = test::make_dataset({"Y", "X"}, kWorked);
  EmOptions opts;
  opts.init = Eigen::Vector2d(0.0, 0.0);
  const EmResult res = run_em(d, "Y", {"X"}, opts);
  std::ostringstream out;
  write_trace_csv(res.trace, out);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "tau,b0,b1,sse,neg2ll");
  size_t rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == res.trace.iterations.size());

  // a complete-case start serializes exactly one row
  std::ostringstream single;
  write_trace_csv(run_em(d, "Y", {"X"}).trace, single);
  std::istringstream sin(single.str());
  size_t lines = 0;
  while (std::getline(sin, line))
    if (!line.empty()) ++lines;
  CHECK(lines == 2);  // header + tau 0
}
