#pragma once

#include <Eigen/Core>
#include <functional>

namespace ringo {

// Limited-memory BFGS with Armijo backtracking. Monotone: every accepted
// iterate strictly decreases the objective.
struct LbfgsParams {
  int max_iterations = 200;
  int history = 8;
  double g_tol = 1e-6;        // stop when the gradient max-norm drops below
  double f_tol = 1e-8;        // stop on relative cost decrease below this
  int max_line_search = 40;   // backtracking halvings per iteration
  double armijo_c = 1e-4;
  double step_shrink = 0.5;
};

enum class LbfgsStatus {
  GradientConverged,
  CostConverged,
  MaxIterations,
  LineSearchFailed,
};

const char* statusName(LbfgsStatus s);

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  double grad_max_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  LbfgsStatus status = LbfgsStatus::MaxIterations;
};

// Objective fills `grad` (same size as x) and returns the cost.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

// Optional per-iteration observer: (iteration, f, grad max-norm).
using IterationCallback = std::function<void(int, double, double)>;

// Minimizes fn from x0. Throws NumericalError if the objective produces a
// non-finite value or gradient at an accepted point (trial points that come
// back non-finite just shrink the step).
LbfgsResult minimize(const Objective& fn, Eigen::VectorXd x0, const LbfgsParams& params = {},
                     const IterationCallback& on_iteration = nullptr);

}  // namespace ringo
