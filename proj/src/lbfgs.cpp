#include "ringo/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <vector>

#include "ringo/errors.hpp"

namespace ringo {

const char* statusName(LbfgsStatus s) {
  switch (s) {
    case LbfgsStatus::GradientConverged:
      return "gradient_converged";
    case LbfgsStatus::CostConverged:
      return "cost_converged";
    case LbfgsStatus::MaxIterations:
      return "max_iterations";
    case LbfgsStatus::LineSearchFailed:
      return "line_search_failed";
  }
  return "unknown";
}

namespace {

struct Pair {
  Eigen::VectorXd s, y;
  double rho;  // 1 / (y . s)
};

// Two-loop recursion: d = -H g with H built from the stored pairs and the
// standard gamma = (s.y)/(y.y) initial scaling.
Eigen::VectorXd searchDirection(const std::deque<Pair>& mem, const Eigen::VectorXd& g) {
  Eigen::VectorXd q = -g;
  std::vector<double> alpha(mem.size());
  for (std::size_t k = mem.size(); k-- > 0;) {
    alpha[k] = mem[k].rho * mem[k].s.dot(q);
    q -= alpha[k] * mem[k].y;
  }
  if (!mem.empty()) {
    const Pair& last = mem.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t k = 0; k < mem.size(); ++k) {
    const double beta = mem[k].rho * mem[k].y.dot(q);
    q += (alpha[k] - beta) * mem[k].s;
  }
  return q;
}

}  // namespace

LbfgsResult minimize(const Objective& fn, Eigen::VectorXd x0, const LbfgsParams& params,
                     const IterationCallback& on_iteration) {
  if (params.history < 1 || params.max_iterations < 1)
    throw ConfigError("minimizer needs positive history and iteration budget");

  LbfgsResult res;
  res.x = std::move(x0);
  const Eigen::Index n = res.x.size();

  Eigen::VectorXd g(n), g_new(n), x_new(n);
  res.f = fn(res.x, g);
  ++res.evaluations;
  if (!std::isfinite(res.f) || !g.allFinite())
    throw NumericalError("objective is not finite at the starting point");

  std::deque<Pair> mem;
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    res.grad_max_norm = g.lpNorm<Eigen::Infinity>();
    if (on_iteration) on_iteration(iter, res.f, res.grad_max_norm);
    if (res.grad_max_norm <= params.g_tol) {
      res.status = LbfgsStatus::GradientConverged;
      return res;
    }

    Eigen::VectorXd d = searchDirection(mem, g);
    double slope = g.dot(d);
    if (!(slope < 0.0)) {  // stale curvature produced a non-descent direction
      mem.clear();
      d = -g;
      slope = -g.squaredNorm();
    }

    // First step without curvature history is scaled down for steep starts.
    double step = mem.empty() ? std::min(1.0, 1.0 / std::max(1.0, g.norm())) : 1.0;
    bool accepted = false;
    double f_new = res.f;
    for (int ls = 0; ls < params.max_line_search; ++ls) {
      x_new = res.x + step * d;
      f_new = fn(x_new, g_new);
      ++res.evaluations;
      if (std::isfinite(f_new) && g_new.allFinite() &&
          f_new <= res.f + params.armijo_c * step * slope) {
        accepted = true;
        break;
      }
      step *= params.step_shrink;
    }
    if (!accepted) {
      res.status = LbfgsStatus::LineSearchFailed;
      return res;
    }

    Pair p;
    p.s = x_new - res.x;
    p.y = g_new - g;
    const double sy = p.s.dot(p.y);
    if (sy > 1e-10 * p.s.norm() * p.y.norm()) {
      p.rho = 1.0 / sy;
      mem.push_back(std::move(p));
      if (static_cast<int>(mem.size()) > params.history) mem.pop_front();
    }

    const double decrease = res.f - f_new;
    res.x.swap(x_new);
    g.swap(g_new);
    res.f = f_new;
    ++res.iterations;
    if (decrease <= params.f_tol * std::max(1.0, std::abs(res.f))) {
      res.grad_max_norm = g.lpNorm<Eigen::Infinity>();
      res.status = LbfgsStatus::CostConverged;
      return res;
    }
  }
  res.grad_max_norm = g.lpNorm<Eigen::Infinity>();
  res.status = LbfgsStatus::MaxIterations;
  return res;
}

}  // namespace ringo
