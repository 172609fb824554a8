#include <benchmark/benchmark.h>

#include <random>

#include "regem/closed_form.hpp"
#include "regem/dataset.hpp"
#include "regem/nls.hpp"
#include "regem/ols.hpp"

namespace {

regem::Dataset random_response_only(int n, int p, int n_missing, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  regem::Dataset d;
  d.names.resize(static_cast<size_t>(p));
  for (int j = 0; j < p; ++j) d.names[static_cast<size_t>(j)] = "V" + std::to_string(j);
  d.values.setZero(n, p);
  d.mask.setConstant(n, p, true);
  for (int i = 0; i < n; ++i) {
    double y = 1.0;
    for (int j = 1; j < p; ++j) {
      d.values(i, j) = noise(gen);
      y += 0.5 * d.values(i, j);
    }
    d.values(i, 0) = y + noise(gen);
  }
  for (int i = 0; i < n_missing; ++i) {
    d.mask(i, 0) = false;
    d.values(i, 0) = 0.0;
  }
  return d;
}

void BM_FitOls(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  std::mt19937 gen(42);
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::MatrixXd X(n, 4);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (int j = 1; j < 4; ++j) X(i, j) = noise(gen);
    y(i) = X.row(i).sum() + noise(gen);
  }
  for (auto _ : state) {
    auto fit = regem::fit_ols(X, y);
    benchmark::DoNotOptimize(fit);
  }
}
BENCHMARK(BM_FitOls)->Arg(64)->Arg(512)->Arg(4096);

void BM_ClosedFormImpute(benchmark::State& state) {
  const auto d = random_response_only(static_cast<int>(state.range(0)), 5, 8, 7);
  const std::vector<std::string> preds{"V1", "V2", "V3", "V4"};
  for (auto _ : state) {
    auto imp = regem::impute_closed_form(d, "V0", preds);
    benchmark::DoNotOptimize(imp);
  }
}
BENCHMARK(BM_ClosedFormImpute)->Arg(64)->Arg(512);

void BM_SolveConcatenatedHald13(benchmark::State& state) {
  const auto d = regem::embedded_hald13();
  const auto sys = regem::build_concatenated(d);
  for (auto _ : state) {
    auto res = regem::solve_concatenated(sys);
    benchmark::DoNotOptimize(res);
  }
}
BENCHMARK(BM_SolveConcatenatedHald13);

}  // namespace

BENCHMARK_MAIN();
