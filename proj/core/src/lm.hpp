#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace regem::detail {

// r(x): residual vector; J(x) = d r / d x.
struct LmProblem {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residual;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
};

struct LmOptions {
  double tol = 1e-12;      // relative SSE decrease per accepted step
  double grad_tol = 1e-8;  // infinity norm of J^T r over free parameters
  int max_iter = 500;
  double lambda0 = 1e-3;
  Eigen::VectorXd lower;   // empty = unbounded; else size(x), -inf where free
};

struct LmOutcome {
  Eigen::VectorXd x;
  double sse = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<char> at_lower;   // active bound at the solution
  Eigen::MatrixXd jacobian;     // J at the solution
};

// Damped Gauss-Newton with Marquardt diagonal scaling: lambda shrinks by 10
// on an accepted step and grows by 10 on a rejected one. Lower bounds are
// handled by projecting trial points and freezing parameters that sit at
// their bound with an outward-pointing gradient.
LmOutcome lm_minimize(const LmProblem& prob, Eigen::VectorXd x0,
                      const LmOptions& opts);

}  // namespace regem::detail
