#include "ringo/bspline.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "ringo/errors.hpp"
#include "ringo/rng.hpp"

using Eigen::Vector3d;
using namespace ringo;

namespace {

// Textbook recursive basis function, kept deliberately independent of the
// library's triangular evaluation scheme.
double basisRecursive(const std::vector<double>& kn, int i, int p, double t) {
  if (p == 0) {
    const std::size_t ui = static_cast<std::size_t>(i);
    return (t >= kn[ui] && t < kn[ui + 1]) ? 1.0 : 0.0;
  }
  const std::size_t ui = static_cast<std::size_t>(i);
  double acc = 0.0;
  const double den_a = kn[ui + static_cast<std::size_t>(p)] - kn[ui];
  if (den_a != 0.0) acc += (t - kn[ui]) / den_a * basisRecursive(kn, i, p - 1, t);
  const double den_b = kn[ui + static_cast<std::size_t>(p) + 1] - kn[ui + 1];
  if (den_b != 0.0)
    acc += (kn[ui + static_cast<std::size_t>(p) + 1] - t) / den_b * basisRecursive(kn, i + 1, p - 1, t);
  return acc;
}

Vector3d evalRecursive(const BSplineCurve& c, double t) {
  const auto& kn = c.knots()->values();
  Vector3d p = Vector3d::Zero();
  for (int i = 0; i < c.numControlPoints(); ++i)
    p += basisRecursive(kn, i, c.degree(), t) * c.controlPoints()[static_cast<std::size_t>(i)];
  return p;
}

// Distance from p to the convex hull of pts, solved exactly by enumerating
// every face (subset) of the hull and taking the best feasible
// equality-constrained least squares solution.
double hullDistance(const std::vector<Vector3d>& pts, const Vector3d& p) {
  const int n = static_cast<int>(pts.size());
  double best = std::numeric_limits<double>::infinity();
  for (int mask = 1; mask < (1 << n); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (mask & (1 << i)) idx.push_back(i);
    const int m = static_cast<int>(idx.size());
    // Solve min ||sum w_i P_i - p|| s.t. sum w_i = 1 over the affine hull
    // of the subset, parameterized as w = w0 + Z u with w0 = e_1.
    Eigen::MatrixXd P(3, m);
    for (int j = 0; j < m; ++j) P.col(j) = pts[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
    Eigen::VectorXd w;
    if (m == 1) {
      w = Eigen::VectorXd::Ones(1);
    } else {
      Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(m, m - 1);
      for (int j = 0; j < m - 1; ++j) {
        Z(0, j) = -1.0;
        Z(j + 1, j) = 1.0;
      }
      const Eigen::MatrixXd A = P * Z;
      Eigen::VectorXd w0 = Eigen::VectorXd::Zero(m);
      w0(0) = 1.0;
      const Eigen::VectorXd u =
          (A.transpose() * A).ldlt().solve(A.transpose() * (p - P * w0));
      w = w0 + Z * u;
    }
    if ((w.array() < -1e-12).any()) continue;
    const double d = (P * w - p).norm();
    best = std::min(best, d);
  }
  return best;
}

std::vector<Vector3d> line(int n, const Vector3d& a, const Vector3d& b) {
  std::vector<Vector3d> out;
  for (int i = 0; i < n; ++i) out.push_back(a + (b - a) * (static_cast<double>(i) / (n - 1)));
  return out;
}

KnotVectorPtr randomKnots(Rng& rng, int n_ctrl, int degree) {
  std::vector<double> kn;
  double t = rng.uniform(-1.0, 1.0);
  for (int i = 0; i < n_ctrl + degree + 1; ++i) {
    kn.push_back(t);
    t += rng.uniform(0.2, 1.5);
  }
  return std::make_shared<const KnotVector>(std::move(kn));
}

BSplineCurve randomCurve(Rng& rng, int n_ctrl, int degree) {
  std::vector<Vector3d> pts;
  for (int i = 0; i < n_ctrl; ++i)
    pts.push_back(rng.uniformBox(Vector3d(-5, -5, -5), Vector3d(5, 5, 5)));
  return BSplineCurve(degree, std::move(pts), randomKnots(rng, n_ctrl, degree));
}

}  // namespace

TEST_CASE("evaluation matches the recursive basis definition") {
  Rng rng(81231);
  for (int trial = 0; trial < 30; ++trial) {
    const int n_ctrl = static_cast<int>(rng.uniformInt(5, 12));
    const BSplineCurve c = randomCurve(rng, n_ctrl, 3);
    for (int q = 0; q < 40; ++q) {
      // half-open sampling keeps the degree-0 indicator convention valid
      const double t =
          c.domainStart() + rng.uniform01() * 0.999 * (c.domainEnd() - c.domainStart());
      const Vector3d a = c.evaluate(t);
      const Vector3d b = evalRecursive(c, t);
      CHECK((a - b).norm() < 1e-10 * std::max(1.0, b.norm()));
    }
  }
}

TEST_CASE("constant control points give a constant curve") {
  const Vector3d p(0.3, -1.2, 2.0);
  auto kn = KnotVector::clampedUniform(0.0, 4.0, 5, 3);
  const BSplineCurve c(3, std::vector<Vector3d>(8, p), kn);
  for (double t = 0.0; t <= 4.0; t += 0.13) CHECK((c.evaluate(t) - p).norm() < 1e-14);
  CHECK((c.evaluate(4.0) - p).norm() < 1e-14);
}

TEST_CASE("uniform knots with collinear equally spaced control points reproduce a line") {
  // Greville abscissae of a uniform cubic knot vector are equally spaced, so
  // equally spaced collinear control points reproduce an affine function.
  auto kn = KnotVector::uniform(0.0, 1.0, 8);  // 4 control points, domain [3, 4]
  std::vector<Vector3d> pts = line(4, Vector3d::Zero(), Vector3d(3, 0, 0));
  const BSplineCurve c(3, pts, kn);
  CHECK((c.evaluate(3.5) - Vector3d(1.5, 0, 0)).norm() < 1e-12);
  CHECK((c.evaluate(3.0) - Vector3d(1.0, 0, 0)).norm() < 1e-12);
  CHECK((c.evaluate(4.0) - Vector3d(2.0, 0, 0)).norm() < 1e-12);
}

TEST_CASE("evaluation outside the domain throws") {
  auto kn = KnotVector::clampedUniform(0.0, 2.0, 4, 3);
  const BSplineCurve c(3, std::vector<Vector3d>(7, Vector3d::Zero()), kn);
  CHECK_THROWS_AS(c.evaluate(-0.1), DomainError);
  CHECK_THROWS_AS(c.evaluate(2.1), DomainError);
  CHECK_NOTHROW(c.evaluate(0.0));
  CHECK_NOTHROW(c.evaluate(2.0));
}

TEST_CASE("clamped curves interpolate their end control points") {
  Rng rng(4242);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Vector3d> pts;
    for (int i = 0; i < 9; ++i)
      pts.push_back(rng.uniformBox(Vector3d(-2, -2, -2), Vector3d(2, 2, 2)));
    auto kn = KnotVector::clampedUniform(1.0, 7.0, 6, 3);
    const BSplineCurve c(3, pts, kn);
    CHECK((c.evaluate(1.0) - pts.front()).norm() < 1e-12);
    CHECK((c.evaluate(7.0) - pts.back()).norm() < 1e-12);
  }
}

TEST_CASE("subtract is exact at every parameter and shares knots") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const int n_ctrl = static_cast<int>(rng.uniformInt(6, 12));
    auto kn = randomKnots(rng, n_ctrl, 3);
    std::vector<Vector3d> pa, pb;
    for (int i = 0; i < n_ctrl; ++i) {
      pa.push_back(rng.uniformBox(Vector3d(-4, -4, -4), Vector3d(4, 4, 4)));
      pb.push_back(rng.uniformBox(Vector3d(-4, -4, -4), Vector3d(4, 4, 4)));
    }
    const BSplineCurve a(3, pa, kn);
    const BSplineCurve b(3, pb, kn);
    const BSplineCurve d = subtract(a, b);
    CHECK(d.knots() == a.knots());
    for (int q = 0; q < 100; ++q) {
      const double t = rng.uniform(a.domainStart(), a.domainEnd());
      CHECK((d.evaluate(t) - (a.evaluate(t) - b.evaluate(t))).norm() < 1e-10);
    }
  }
}

TEST_CASE("subtract of a curve from itself is identically zero") {
  Rng rng(7);
  const BSplineCurve a = randomCurve(rng, 8, 3);
  const BSplineCurve z = subtract(a, a);
  for (const auto& p : z.controlPoints()) CHECK(p.norm() == 0.0);
}

TEST_CASE("subtract rejects mismatched knots") {
  Rng rng(55);
  const BSplineCurve a = randomCurve(rng, 8, 3);
  const BSplineCurve b = randomCurve(rng, 8, 3);  // different random knots
  CHECK_THROWS_AS(subtract(a, b), IncompatibleCurves);
  const BSplineCurve c = randomCurve(rng, 9, 3);
  CHECK_THROWS_AS(subtract(a, c), IncompatibleCurves);
}

TEST_CASE("curve points lie in the convex hull of their segment control points") {
  Rng rng(1234);
  int checked = 0;
  for (int trial = 0; trial < 25; ++trial) {
    const BSplineCurve c = randomCurve(rng, static_cast<int>(rng.uniformInt(6, 11)), 3);
    for (int q = 0; q < 40; ++q) {
      const double t = rng.uniform(c.domainStart(), c.domainEnd());
      const int seg = c.segmentOfParameter(t);
      const auto hull = c.segmentHull(seg);
      CHECK(hull.size() == 4);
      CHECK(hullDistance(hull, c.evaluate(t)) < 1e-9);
      ++checked;
    }
  }
  CHECK(checked == 1000);
}

TEST_CASE("segment hull indexing and bounds") {
  auto kn = KnotVector::uniform(0.0, 0.5, 12);  // degree 3 -> 8 control points
  Rng rng(3);
  std::vector<Vector3d> pts;
  for (int i = 0; i < 8; ++i) pts.push_back(Vector3d(i, 0, 0));
  const BSplineCurve c(3, pts, kn);
  CHECK(c.numSegments() == 5);
  const auto h0 = c.segmentHull(0);
  CHECK(h0.front().x() == 0.0);
  CHECK(h0.back().x() == 3.0);
  CHECK_THROWS_AS(c.segmentHull(5), std::out_of_range);
  CHECK_THROWS_AS(c.segmentHull(-1), std::out_of_range);
}

TEST_CASE("acceleration stencil reduces to the classic second difference on uniform knots") {
  // Spacings chosen exactly representable in binary so the reduction is exact.
  for (const double dt : {1.0, 0.5, 0.25, 2.0}) {
    auto kn = KnotVector::uniform(0.0, dt, 12);
    for (int i = 0; i <= 5; ++i) {
      const AccelStencil m = accelStencil(*kn, 3, i);
      const double inv = 1.0 / (dt * dt);
      CHECK(m.m0 == inv);
      CHECK(m.m1 == -2.0 * inv);
      CHECK(m.m2 == inv);
    }
  }
}

TEST_CASE("acceleration stencil applied to a control point triple") {
  auto kn = KnotVector::uniform(0.0, 1.0, 7);
  const AccelStencil m = accelStencil(*kn, 3, 0);
  const Vector3d a = m.m0 * Vector3d::Zero() + m.m1 * Vector3d(1, 0, 0) + m.m2 * Vector3d(4, 0, 0);
  CHECK((a - Vector3d(2, 0, 0)).norm() == 0.0);
}

TEST_CASE("acceleration control points of a uniform curve are second differences") {
  auto kn = KnotVector::uniform(0.0, 1.0, 8);
  const std::vector<Vector3d> pts = {Vector3d::Zero(), Vector3d(1, 0, 0), Vector3d(4, 0, 0),
                                     Vector3d(9, 0, 0)};
  const BSplineCurve c(3, pts, kn);
  const auto acc = accelControlPoints(c);
  REQUIRE(acc.size() == 2);
  CHECK((acc[0] - Vector3d(2, 0, 0)).norm() == 0.0);
  CHECK((acc[1] - Vector3d(2, 0, 0)).norm() == 0.0);
}

TEST_CASE("collinear equally spaced control points have zero acceleration") {
  auto kn = KnotVector::uniform(0.0, 0.7, 13);
  const BSplineCurve c(3, line(9, Vector3d(0, 1, 2), Vector3d(4, -3, 0)), kn);
  for (const auto& a : accelControlPoints(c)) CHECK(a.norm() < 1e-12);
}

TEST_CASE("acceleration control points match finite-difference second derivatives") {
  Rng rng(20240);
  for (int trial = 0; trial < 20; ++trial) {
    const int n_ctrl = static_cast<int>(rng.uniformInt(7, 12));
    const BSplineCurve c = randomCurve(rng, n_ctrl, 3);
    const auto acc = accelControlPoints(c);
    const auto& kn = c.knots()->values();
    const int N = n_ctrl - 1;
    // A_i is the curve's second derivative at knot t_{i+3}; check interior
    // knots only so the central difference stays inside the domain. The
    // third derivative jumps at the knot, so a single central difference is
    // only first-order accurate there; one Richardson step removes that
    // term exactly because the curve is piecewise cubic.
    for (int i = 1; i <= N - 3; ++i) {
      const double t = kn[static_cast<std::size_t>(i + 3)];
      const double local =
          std::min(t - kn[static_cast<std::size_t>(i + 2)], kn[static_cast<std::size_t>(i + 4)] - t);
      const double h = 1e-3 * local;
      const auto fd2 = [&](double step) -> Vector3d {
        return (c.evaluate(t + step) - 2.0 * c.evaluate(t) + c.evaluate(t - step)) /
               (step * step);
      };
      const Vector3d fd = 2.0 * fd2(h / 2) - fd2(h);
      const Vector3d a = acc[static_cast<std::size_t>(i)];
      const double rel = (fd - a).norm() / std::max(1.0, a.norm());
      CHECK(rel < 1e-4);
    }
  }
}

TEST_CASE("acceleration stencil rejects zero spans") {
  std::vector<double> kn = {0, 0, 0, 0, 0, 1, 2, 3, 4};  // quadruple start knot
  auto knots = std::make_shared<const KnotVector>(kn);
  CHECK_THROWS_AS(accelStencil(*knots, 3, 0), SingularSpan);
}

TEST_CASE("derivative curve matches finite differences of evaluate") {
  Rng rng(31337);
  const BSplineCurve c = randomCurve(rng, 10, 3);
  const BSplineCurve d = c.derivative();
  CHECK(d.degree() == 2);
  for (int q = 0; q < 50; ++q) {
    const double span = c.domainEnd() - c.domainStart();
    const double t = c.domainStart() + span * rng.uniform(0.01, 0.99);
    const double h = 1e-6 * span;
    const Vector3d fd = (c.evaluate(t + h) - c.evaluate(t - h)) / (2 * h);
    CHECK((fd - d.evaluate(t)).norm() < 1e-5 * std::max(1.0, fd.norm()));
  }
}

TEST_CASE("fit recovers the control points of a sampled curve") {
  Rng rng(60601);
  for (int trial = 0; trial < 8; ++trial) {
    const BSplineCurve src = randomCurve(rng, 10, 3);
    const auto samples = src.sampleUniform(120);
    const FitResult fit = fitFromSamples(samples, src.knots(), 3, 0);
    REQUIRE(fit.curve.numControlPoints() == src.numControlPoints());
    for (int i = 0; i < src.numControlPoints(); ++i) {
      const double err = (fit.curve.controlPoints()[static_cast<std::size_t>(i)] -
                          src.controlPoints()[static_cast<std::size_t>(i)])
                             .norm();
      CHECK(err < 1e-8);
    }
    CHECK(fit.rms < 1e-9);
  }
}

TEST_CASE("fit of constant samples yields constant control points") {
  const Vector3d p(1.0, 2.0, -0.5);
  auto kn = KnotVector::clampedUniform(0.0, 5.0, 6, 3);
  std::vector<std::pair<double, Vector3d>> samples;
  for (int i = 0; i <= 60; ++i) samples.emplace_back(5.0 * i / 60.0, p);
  const FitResult fit = fitFromSamples(samples, kn, 3, 3);
  for (const auto& c : fit.curve.controlPoints()) CHECK((c - p).norm() < 1e-10);
  CHECK(fit.rms < 1e-12);
}

TEST_CASE("fit pins the requested number of end control points") {
  auto kn = KnotVector::clampedUniform(0.0, 3.0, 5, 3);
  std::vector<std::pair<double, Vector3d>> samples;
  for (int i = 0; i <= 50; ++i) {
    const double t = 3.0 * i / 50.0;
    samples.emplace_back(t, Vector3d(t, std::sin(t), 0.0));
  }
  const FitResult fit = fitFromSamples(samples, kn, 3, 3);
  const auto& cp = fit.curve.controlPoints();
  for (int i = 0; i < 3; ++i) {
    CHECK((cp[static_cast<std::size_t>(i)] - samples.front().second).norm() == 0.0);
    CHECK((cp[cp.size() - 1 - static_cast<std::size_t>(i)] - samples.back().second).norm() == 0.0);
  }
  // pinned rest ends: zero start and end velocity
  const BSplineCurve d = fit.curve.derivative();
  CHECK(d.evaluate(0.0).norm() < 1e-12);
  CHECK(d.evaluate(3.0).norm() < 1e-12);
}

TEST_CASE("fit with explicit pinned end values") {
  auto kn = KnotVector::clampedUniform(0.0, 2.0, 5, 3);
  std::vector<std::pair<double, Vector3d>> samples;
  for (int i = 0; i <= 40; ++i) {
    const double t = 2.0 * i / 40.0;
    samples.emplace_back(t, Vector3d(t, t * t, 1.0));
  }
  const std::vector<Vector3d> head(3, Vector3d(0, 0, 1));
  const std::vector<Vector3d> tail(3, Vector3d(2, 4, 1));
  const FitResult fit = fitWithPinnedEnds(samples, kn, 3, head, tail);
  CHECK((fit.curve.evaluate(0.0) - Vector3d(0, 0, 1)).norm() < 1e-12);
  CHECK((fit.curve.evaluate(2.0) - Vector3d(2, 4, 1)).norm() < 1e-12);
}

TEST_CASE("fit rejects insufficient or out-of-domain samples") {
  auto kn = KnotVector::clampedUniform(0.0, 1.0, 8, 3);
  std::vector<std::pair<double, Vector3d>> few = {{0.0, Vector3d::Zero()},
                                                  {1.0, Vector3d::Ones()}};
  CHECK_THROWS_AS(fitFromSamples(few, kn, 3, 0), FitError);
  std::vector<std::pair<double, Vector3d>> outside;
  for (int i = 0; i < 30; ++i) outside.emplace_back(2.0 + i, Vector3d::Zero());
  CHECK_THROWS_AS(fitFromSamples(outside, kn, 3, 0), FitError);
}

TEST_CASE("fit detects rank deficiency from clustered samples") {
  auto kn = KnotVector::clampedUniform(0.0, 10.0, 10, 3);
  // all samples in the first span: later control points are undetermined
  std::vector<std::pair<double, Vector3d>> samples;
  for (int i = 0; i < 50; ++i) samples.emplace_back(0.02 * i, Vector3d(i, 0, 0));
  CHECK_THROWS_AS(fitFromSamples(samples, kn, 3, 0), FitError);
}

TEST_CASE("basis functions sum to one across the domain") {
  Rng rng(777);
  for (int trial = 0; trial < 10; ++trial) {
    const BSplineCurve c = randomCurve(rng, 9, 3);
    // partition of unity <=> constant curve reproduces its value
    std::vector<Vector3d> ones(9, Vector3d(1, 1, 1));
    const BSplineCurve unit(3, ones, c.knots());
    for (int q = 0; q < 50; ++q) {
      const double t = rng.uniform(c.domainStart(), c.domainEnd());
      CHECK((unit.evaluate(t) - Vector3d(1, 1, 1)).norm() < 1e-12);
    }
  }
}

TEST_CASE("knot-aligned linear combination property") {
  // For aligned knots, evaluating the difference curve equals the difference
  // of evaluations; this is the identity the relative-curve design rests on.
  Rng rng(2211);
  for (int trial = 0; trial < 10; ++trial) {
    const int n_ctrl = 9;
    auto kn = randomKnots(rng, n_ctrl, 3);
    std::vector<Vector3d> q, x;
    for (int i = 0; i < n_ctrl; ++i) {
      q.push_back(rng.uniformBox(Vector3d(-3, -3, -3), Vector3d(3, 3, 3)));
      x.push_back(rng.uniformBox(Vector3d(-3, -3, -3), Vector3d(3, 3, 3)));
    }
    const BSplineCurve qc(3, q, kn);
    const BSplineCurve xc(3, x, kn);
    const BSplineCurve e = subtract(qc, xc);
    for (int s = 0; s < 100; ++s) {
      const double t = rng.uniform(qc.domainStart(), qc.domainEnd());
      CHECK((qc.evaluate(t) - xc.evaluate(t) - e.evaluate(t)).norm() < 1e-10);
    }
  }
}
