#include "lm.hpp"

#include <cmath>
#include <limits>

#include "log.hpp"

namespace regem::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLambdaMax = 1e15;

bool bounded(const LmOptions& opts) { return opts.lower.size() > 0; }

Eigen::VectorXd project(const Eigen::VectorXd& x, const LmOptions& opts) {
  if (!bounded(opts)) return x;
  return x.cwiseMax(opts.lower);
}

double sse_of(const Eigen::VectorXd& r) {
  const double s = r.squaredNorm();
  return std::isfinite(s) ? s : kInf;
}

}  // namespace

LmOutcome lm_minimize(const LmProblem& prob, Eigen::VectorXd x0,
                      const LmOptions& opts) {
  const Eigen::Index np = x0.size();
  LmOutcome out;
  out.x = project(std::move(x0), opts);
  Eigen::VectorXd r = prob.residual(out.x);
  out.sse = sse_of(r);
  out.at_lower.assign(static_cast<size_t>(np), 0);

  double lambda = opts.lambda0;
  double nu = 2.0;
  Eigen::MatrixXd J = prob.jacobian(out.x);

  auto refresh_active = [&](const Eigen::VectorXd& grad) {
    // at the bound and the objective wants to push further down -> frozen
    for (Eigen::Index j = 0; j < np; ++j) {
      bool active = false;
      if (bounded(opts) && std::isfinite(opts.lower(j)))
        active = out.x(j) <= opts.lower(j) && grad(j) > 0.0;
      out.at_lower[static_cast<size_t>(j)] = active ? 1 : 0;
    }
  };

  auto free_grad_norm = [&](const Eigen::VectorXd& grad) {
    double g = 0.0;
    for (Eigen::Index j = 0; j < np; ++j)
      if (!out.at_lower[static_cast<size_t>(j)])
        g = std::max(g, std::abs(grad(j)));
    return g;
  };

  if (out.sse == 0.0) {
    out.converged = true;
    out.jacobian = std::move(J);
    return out;
  }

  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    out.iterations = iter;
    const Eigen::VectorXd grad = J.transpose() * r;  // (1/2) d sse / d x
    refresh_active(grad);

    std::vector<Eigen::Index> free;
    for (Eigen::Index j = 0; j < np; ++j)
      if (!out.at_lower[static_cast<size_t>(j)]) free.push_back(j);
    if (free.empty()) {
      out.converged = true;  // every parameter pinned with outward gradient
      break;
    }

    Eigen::MatrixXd Jf(J.rows(), static_cast<Eigen::Index>(free.size()));
    for (size_t c = 0; c < free.size(); ++c)
      Jf.col(static_cast<Eigen::Index>(c)) = J.col(free[c]);
    const Eigen::MatrixXd jtj = Jf.transpose() * Jf;
    Eigen::VectorXd diag = jtj.diagonal();
    const double dmax = diag.maxCoeff();
    const double dfloor = std::max(dmax, 1.0) * 1e-14;
    diag = diag.cwiseMax(dfloor);
    Eigen::VectorXd gf(static_cast<Eigen::Index>(free.size()));
    for (size_t c = 0; c < free.size(); ++c)
      gf(static_cast<Eigen::Index>(c)) = grad(free[c]);

    bool accepted = false;
    while (lambda <= kLambdaMax) {
      Eigen::MatrixXd m = jtj;
      m.diagonal() += lambda * diag;
      const Eigen::VectorXd step = m.ldlt().solve(-gf);

      Eigen::VectorXd cand = out.x;
      for (size_t c = 0; c < free.size(); ++c)
        cand(free[c]) += step(static_cast<Eigen::Index>(c));
      cand = project(cand, opts);

      const Eigen::VectorXd rc = prob.residual(cand);
      const double sse_c = sse_of(rc);
      if (sse_c < out.sse) {
        const double drop = out.sse - sse_c;
        // gain ratio against the damped quadratic model; a poor model keeps
        // the damping up even on accepted steps, which is what lets the
        // solver track narrow curved valleys instead of zigzagging
        const double predicted =
            step.dot((lambda * diag.asDiagonal() * step - gf).eval());
        const double rho = drop / std::max(predicted, 1e-300);
        const double shrink = 1.0 - std::pow(2.0 * rho - 1.0, 3);
        lambda *= std::max(1.0 / 3.0, std::min(shrink, 1.0));
        lambda = std::max(lambda, 1e-15);
        nu = 2.0;

        out.x = std::move(cand);
        r = rc;
        const double prev = out.sse;
        out.sse = sse_c;
        J = prob.jacobian(out.x);

        if (out.sse == 0.0) {
          out.converged = true;
        } else if (drop <= opts.tol * std::max(prev, 1e-300)) {
          const Eigen::VectorXd g_new = J.transpose() * r;
          refresh_active(g_new);
          out.converged = free_grad_norm(g_new) < opts.grad_tol;
        }
        accepted = true;
        break;
      }
      lambda *= nu;
      nu *= 2.0;
    }

    if (log_level() >= LogLevel::kDebug)
      log("lm iter " + std::to_string(iter) + " sse " + std::to_string(out.sse) +
          " lambda " + std::to_string(lambda));

    if (!accepted) {
      // damping exhausted: no descent direction left at this precision
      const Eigen::VectorXd g_now = J.transpose() * r;
      refresh_active(g_now);
      out.converged = free_grad_norm(g_now) < opts.grad_tol;
      break;
    }
    if (out.converged) break;
  }

  out.jacobian = std::move(J);
  return out;
}

}  // namespace regem::detail
