#include "regem/ols.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "regem/errors.hpp"

using namespace regem;

namespace {

Eigen::MatrixXd with_intercept(const std::vector<double>& x) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(x.size()), 2);
  for (size_t i = 0; i < x.size(); ++i) {
    X(static_cast<Eigen::Index>(i), 0) = 1.0;
    X(static_cast<Eigen::Index>(i), 1) = x[i];
  }
  return X;
}

Eigen::VectorXd vec(const std::vector<double>& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

}  // namespace

TEST_CASE("worked 3-point fit: normal equations solved by hand") {
  // X=[0,1,2], Y=[0,2,1]: XtX=[[3,3],[3,5]], Xty=[3,4] -> b=(0.5,0.5)
  const OlsFit fit = fit_ols(with_intercept({0, 1, 2}), vec({0, 2, 1}));
  CHECK(fit.coefficients(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fit.coefficients(1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fit.sse == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(fit.df == 1);
  CHECK(fit.sigma2_hat == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("exact line has zero sse") {
  const OlsFit fit = fit_ols(with_intercept({1, 2, 3}), vec({2, 4, 6}));
  CHECK(fit.coefficients(0) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(fit.coefficients(1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.sse == doctest::Approx(0.0));
  CHECK(predict_new(fit, with_intercept({4}))(0) == doctest::Approx(8.0));
}

TEST_CASE("collinear design raises a singularity error") {
  CHECK_THROWS_WITH_AS(fit_ols(with_intercept({1, 1, 1}), vec({1, 2, 3})),
                       doctest::Contains("estimable"), SingularError);
  // too few rows
  CHECK_THROWS_AS(fit_ols(with_intercept({1, 2}), vec({1, 2})), SingularError);
}

TEST_CASE("prediction, leverage and prediction se on the worked fit") {
  const OlsFit fit = fit_ols(with_intercept({0, 1, 2}), vec({0, 2, 1}));
  CHECK(predict_new(fit, with_intercept({3}))(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(predict_new(fit, Eigen::MatrixXd(0, 2)).size() == 0);

  // inverting [[3,3],[3,5]] by hand gives leverage 7/3 at (1,3)
  CHECK(leverage(fit, vec({1, 3})) == doctest::Approx(7.0 / 3.0).epsilon(1e-12));
  CHECK(leverage(fit, vec({1, 1})) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(leverage(fit, vec({0, 0})) == doctest::Approx(0.0));

  CHECK(prediction_se(1.5, 7.0 / 3.0) ==
        doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
  CHECK(prediction_se(0.0, 123.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(prediction_se(-1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(prediction_se(1.0, -0.5), ConfigError);
  CHECK_THROWS_AS(leverage(fit, vec({1, 2, 3})), ConfigError);
  CHECK_THROWS_AS(predict_new(fit, Eigen::MatrixXd::Ones(1, 3)), ConfigError);
}

TEST_CASE("reported table value: sqrt(10.6239 * 1.05346) = 3.34542") {
  CHECK(prediction_se(10.6239, 0.05346) == doctest::Approx(3.34542).epsilon(1e-5));
}

TEST_CASE("neg2_loglik formula") {
  const Eigen::MatrixXd X = with_intercept({1, 2, 3});
  const Eigen::VectorXd y = vec({2, 4, 6});
  const Eigen::VectorXd b = vec({0, 2});

  SUBCASE("perfect fit, sigma2=1") {
    CHECK(neg2_loglik(y, X, b, 1.0) ==
          doctest::Approx(3.0 * std::log(2.0 * std::numbers::pi)).epsilon(1e-12));
    CHECK(neg2_loglik(y, X, b, 1.0) == doctest::Approx(5.5137).epsilon(1e-4));
  }
  SUBCASE("sse and variance terms") {
    // the worked fit: SSE=1.5 at sigma2=1.5
    const Eigen::MatrixXd X2 = with_intercept({0, 1, 2});
    const Eigen::VectorXd y2 = vec({0, 2, 1});
    const Eigen::VectorXd b2 = vec({0.5, 0.5});
    const double expected =
        3.0 * std::log(2.0 * std::numbers::pi) + 3.0 * std::log(1.5) + 1.0;
    CHECK(neg2_loglik(y2, X2, b2, 1.5) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("scaling sigma2 by c scales the SSE term by 1/c") {
    const Eigen::VectorXd b0 = vec({1, 1});
    const double s1 = neg2_loglik(y, X, b0, 2.0);
    const double s2 = neg2_loglik(y, X, b0, 4.0);
    const double sse = (y - X * b0).squaredNorm();
    CHECK(s1 - 3.0 * std::log(2.0) - sse / 2.0 ==
          doctest::Approx(s2 - 3.0 * std::log(4.0) - sse / 4.0).epsilon(1e-12));
  }
  SUBCASE("nonpositive variance is rejected") {
    CHECK_THROWS_AS(neg2_loglik(y, X, b, 0.0), ConfigError);
    CHECK_THROWS_AS(neg2_loglik(y, X, b, -1.0), ConfigError);
  }
}

TEST_CASE("residual orthogonality X^T r = 0 on random instances") {
  std::mt19937 gen(2024);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 8 + trial % 17, k = 2 + trial % 3;
    Eigen::MatrixXd X(n, k);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      X(i, 0) = 1.0;
      for (int j = 1; j < k; ++j) X(i, j) = normal(gen);
      y(i) = normal(gen) * 3.0;
    }
    const OlsFit fit = fit_ols(X, y);
    const Eigen::VectorXd orth = X.transpose() * (y - X * fit.coefficients);
    CHECK(orth.cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("predictions at observed rows equal the hat matrix action") {
  std::mt19937 gen(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd X(8, 2);
    Eigen::VectorXd y(8);
    for (int i = 0; i < 8; ++i) {
      X(i, 0) = 1.0;
      X(i, 1) = normal(gen);
      y(i) = normal(gen);
    }
    const OlsFit fit = fit_ols(X, y);
    const Eigen::MatrixXd H =
        X * (X.transpose() * X).inverse() * X.transpose();  // direct oracle
    const Eigen::VectorXd fitted = predict_new(fit, X);
    CHECK((fitted - H * y).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("prediction_se is monotone in both arguments") {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double s2 = u(gen), h = u(gen), ds = u(gen), dh = u(gen);
    CHECK(prediction_se(s2 + ds, h) >= prediction_se(s2, h));
    CHECK(prediction_se(s2, h + dh) >= prediction_se(s2, h));
  }
}

TEST_CASE("leverage at the column mean of a simple regression is 1/n") {
  std::mt19937 gen(3);
  std::normal_distribution<double> normal(0.0, 2.0);
  Eigen::MatrixXd X(9, 2);
  Eigen::VectorXd y(9);
  for (int i = 0; i < 9; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = normal(gen);
    y(i) = normal(gen);
  }
  const OlsFit fit = fit_ols(X, y);
  Eigen::VectorXd mean_point(2);
  mean_point << 1.0, X.col(1).mean();
  CHECK(leverage(fit, mean_point) == doctest::Approx(1.0 / 9.0).epsilon(1e-10));
}
