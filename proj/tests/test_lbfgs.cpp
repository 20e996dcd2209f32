#include "ringo/lbfgs.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "ringo/errors.hpp"
#include "ringo/rng.hpp"

using Eigen::VectorXd;
using namespace ringo;

TEST_CASE("quadratic bowl converges to the analytic minimizer") {
  // f(x) = 0.5 x'Ax - b'x with SPD A; minimizer solves Ax = b
  Rng rng(101);
  const int n = 12;
  Eigen::MatrixXd R(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) R(i, j) = rng.uniform(-1, 1);
  Eigen::MatrixXd A = R.transpose() * R + 0.5 * Eigen::MatrixXd::Identity(n, n);
  VectorXd b(n);
  for (int i = 0; i < n; ++i) b(i) = rng.uniform(-2, 2);
  const VectorXd x_star = A.ldlt().solve(b);

  auto fn = [&](const VectorXd& x, VectorXd& g) {
    g = A * x - b;
    return 0.5 * x.dot(A * x) - b.dot(x);
  };
  LbfgsParams p;
  p.g_tol = 1e-7;  // near the double-precision floor for O(1) cost values
  p.f_tol = 0.0;
  const LbfgsResult r = minimize(fn, VectorXd::Zero(n), p);
  CHECK(r.status == LbfgsStatus::GradientConverged);
  CHECK((r.x - x_star).norm() < 1e-5);
  CHECK(r.grad_max_norm <= 1e-7);
}

TEST_CASE("ill conditioned quadratic still converges") {
  const int n = 20;
  VectorXd diag(n);
  for (int i = 0; i < n; ++i) diag(i) = std::pow(10.0, 4.0 * i / (n - 1));  // cond 1e4
  auto fn = [&](const VectorXd& x, VectorXd& g) {
    g = diag.cwiseProduct(x);
    return 0.5 * x.dot(g);
  };
  LbfgsParams p;
  p.g_tol = 1e-9;
  p.f_tol = 0.0;
  p.history = 20;  // full curvature for the 20d quadratic
  p.max_iterations = 2000;
  const LbfgsResult r = minimize(fn, VectorXd::Ones(n), p);
  CHECK(r.status == LbfgsStatus::GradientConverged);
  CHECK(r.x.norm() < 1e-7);
}

TEST_CASE("rosenbrock reaches the global minimum") {
  auto fn = [](const VectorXd& x, VectorXd& g) {
    const int n = static_cast<int>(x.size());
    double f = 0.0;
    g.setZero();
    for (int i = 0; i + 1 < n; ++i) {
      const double a = x[i + 1] - x[i] * x[i];
      const double b = 1.0 - x[i];
      f += 100.0 * a * a + b * b;
      g[i] += -400.0 * a * x[i] - 2.0 * b;
      g[i + 1] += 200.0 * a;
    }
    return f;
  };

  SUBCASE("classic 2d start") {
    VectorXd x0(2);
    x0 << -1.2, 1.0;
    LbfgsParams p;
    p.g_tol = 1e-8;
    p.f_tol = 0.0;
    p.max_iterations = 500;
    const LbfgsResult r = minimize(fn, x0, p);
    CHECK(r.status == LbfgsStatus::GradientConverged);
    CHECK((r.x - VectorXd::Ones(2)).norm() < 1e-6);
  }

  SUBCASE("10d") {
    LbfgsParams p;
    p.g_tol = 1e-8;
    p.f_tol = 0.0;
    p.max_iterations = 2000;
    const LbfgsResult r = minimize(fn, VectorXd::Zero(10), p);
    CHECK(r.status == LbfgsStatus::GradientConverged);
    CHECK((r.x - VectorXd::Ones(10)).norm() < 1e-6);
  }
}

TEST_CASE("accepted iterates are monotone decreasing") {
  Rng rng(103);
  auto fn = [](const VectorXd& x, VectorXd& g) {
    // smooth non-convex objective
    double f = 0.0;
    g.resize(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      f += std::sin(x[i]) + 0.1 * x[i] * x[i];
      g[i] = std::cos(x[i]) + 0.2 * x[i];
    }
    return f;
  };
  VectorXd x0(8);
  for (int i = 0; i < 8; ++i) x0[i] = rng.uniform(-3, 3);
  std::vector<double> history;
  const LbfgsResult r =
      minimize(fn, x0, {}, [&](int, double f, double) { history.push_back(f); });
  CHECK(history.size() >= 2);
  for (std::size_t i = 1; i < history.size(); ++i) CHECK(history[i] < history[i - 1]);
  CHECK(r.f <= history.back());
}

TEST_CASE("stationary start returns immediately") {
  auto fn = [](const VectorXd& x, VectorXd& g) {
    g = 2.0 * x;
    return x.squaredNorm();
  };
  const LbfgsResult r = minimize(fn, VectorXd::Zero(5));
  CHECK(r.status == LbfgsStatus::GradientConverged);
  CHECK(r.iterations == 0);
  CHECK(r.evaluations == 1);
}

TEST_CASE("unbounded descent stops at the iteration budget") {
  auto fn = [](const VectorXd& x, VectorXd& g) {
    g = -VectorXd::Ones(x.size());
    return -x.sum();
  };
  LbfgsParams p;
  p.max_iterations = 30;
  p.f_tol = 0.0;
  const LbfgsResult r = minimize(fn, VectorXd::Zero(3), p);
  CHECK(r.status == LbfgsStatus::MaxIterations);
  CHECK(r.iterations == 30);
}

TEST_CASE("relative cost tolerance triggers cost convergence") {
  auto fn = [](const VectorXd& x, VectorXd& g) {
    g = 2.0 * x;
    return x.squaredNorm() + 100.0;
  };
  LbfgsParams p;
  p.f_tol = 1e-3;  // coarse: stops as soon as progress stalls relative to |f|
  p.g_tol = 0.0;
  VectorXd x0 = VectorXd::Constant(4, 0.01);
  const LbfgsResult r = minimize(fn, x0, p);
  CHECK(r.status == LbfgsStatus::CostConverged);
}

TEST_CASE("non finite start throws") {
  auto fn = [](const VectorXd& x, VectorXd& g) {
    g = x;
    return std::numeric_limits<double>::quiet_NaN();
  };
  CHECK_THROWS_AS(minimize(fn, VectorXd::Zero(2)), NumericalError);
}

TEST_CASE("non finite trial values shrink the step instead of failing") {
  // f blows up for |x| > 1 but has its minimum at 0.5; the optimizer must
  // survive overshooting into the bad region.
  auto fn = [](const VectorXd& x, VectorXd& g) {
    g.resize(1);
    if (std::abs(x[0]) > 1.0) {
      g[0] = std::numeric_limits<double>::quiet_NaN();
      return std::numeric_limits<double>::quiet_NaN();
    }
    g[0] = 2.0 * (x[0] - 0.5);
    return (x[0] - 0.5) * (x[0] - 0.5);
  };
  VectorXd x0(1);
  x0 << -0.9;
  LbfgsParams p;
  p.g_tol = 1e-10;
  p.f_tol = 0.0;
  const LbfgsResult r = minimize(fn, x0, p);
  CHECK(r.status == LbfgsStatus::GradientConverged);
  CHECK(std::abs(r.x[0] - 0.5) < 1e-8);
}

TEST_CASE("bad parameters are rejected") {
  auto fn = [](const VectorXd& x, VectorXd& g) {
    g = x;
    return 0.5 * x.squaredNorm();
  };
  LbfgsParams p;
  p.history = 0;
  CHECK_THROWS_AS(minimize(fn, VectorXd::Zero(2), p), ConfigError);
}
