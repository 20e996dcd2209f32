#pragma once

#include <Eigen/Core>
#include <array>
#include <memory>
#include <utility>
#include <vector>

namespace ringo {

// Immutable non-decreasing knot sequence. Curves hold these through a
// shared_ptr so knot alignment between curves is structural: curves built
// from the same KnotVector instance stay aligned by construction.
class KnotVector {
 public:
  explicit KnotVector(std::vector<double> knots);

  // Clamped knot vector with uniform interior spacing: the first and last
  // knot each repeated degree+1 times, num_spans equal spans in between.
  static std::shared_ptr<const KnotVector> clampedUniform(double t_start, double t_end,
                                                          int num_spans, int degree);

  // Strictly uniform (unclamped) spacing t0, t0+dt, t0+2*dt, ...
  static std::shared_ptr<const KnotVector> uniform(double t0, double dt, int count);

  double operator[](int i) const { return knots_[static_cast<std::size_t>(i)]; }
  int size() const { return static_cast<int>(knots_.size()); }
  const std::vector<double>& values() const { return knots_; }

 private:
  std::vector<double> knots_;
};

using KnotVectorPtr = std::shared_ptr<const KnotVector>;

namespace detail {
// Index k with knots[k] <= t < knots[k+1], restricted to the evaluable
// range [degree, n_ctrl-1]. t may sit on the domain end.
int findSpan(const KnotVector& knots, int degree, int n_ctrl, double t);
// Values of the degree+1 basis functions active on span k, i.e.
// B_{k-degree}..B_k evaluated at t. Zero-width spans follow the 0/0 := 0
// convention of the recursive basis definition.
void basisFunctions(const KnotVector& knots, int degree, int k, double t, double* out);
}  // namespace detail

// Polynomial spline curve in R^3 over a shared knot vector. Immutable after
// construction; all mutating operations return new curves, so instances can
// be read concurrently without synchronization.
class BSplineCurve {
 public:
  BSplineCurve(int degree, std::vector<Eigen::Vector3d> control_points, KnotVectorPtr knots);

  int degree() const { return degree_; }
  int numControlPoints() const { return static_cast<int>(ctrl_.size()); }
  const std::vector<Eigen::Vector3d>& controlPoints() const { return ctrl_; }
  const KnotVectorPtr& knots() const { return knots_; }

  // Evaluable parameter range [t_degree, t_{N+1}], inclusive on both ends.
  double domainStart() const { return (*knots_)[degree_]; }
  double domainEnd() const { return (*knots_)[numControlPoints()]; }
  double duration() const { return domainEnd() - domainStart(); }

  // Point on the curve; throws DomainError outside the evaluable range.
  Eigen::Vector3d evaluate(double t) const;

  // Derivative as a curve of one lower degree over the trimmed knot vector.
  BSplineCurve derivative() const;

  // One segment per knot span of the domain: segment j lives on
  // [t_{j+degree}, t_{j+degree+1}] and is determined by (and contained in
  // the convex hull of) control points j .. j+degree.
  int numSegments() const { return numControlPoints() - degree_; }
  std::vector<Eigen::Vector3d> segmentHull(int segment_index) const;
  int segmentOfParameter(double t) const;

  // count >= 2 points evenly spaced over the domain, endpoints included.
  std::vector<std::pair<double, Eigen::Vector3d>> sampleUniform(int count) const;

 private:
  int degree_;
  std::vector<Eigen::Vector3d> ctrl_;
  KnotVectorPtr knots_;
};

// Control-point-wise difference of two curves with identical order and
// knots. The result shares the knot vector of `a`, so evaluating it equals
// a(t) - b(t) for every t in the common domain.
BSplineCurve subtract(const BSplineCurve& a, const BSplineCurve& b);

// Row of the linear map taking three consecutive control points
// (P_i, P_{i+1}, P_{i+2}) to the i-th control point of the second
// derivative spline. Throws SingularSpan if a required span is zero.
struct AccelStencil {
  double m0, m1, m2;
};
AccelStencil accelStencil(const KnotVector& knots, int degree, int i);

// Second-derivative control points A_0..A_{N-2}. A_i equals the curve's
// second derivative at knot t_{i+degree} where that knot is interior.
std::vector<Eigen::Vector3d> accelControlPoints(const BSplineCurve& curve);

struct FitResult {
  BSplineCurve curve;
  double rms;  // root-mean-square sample residual
};

// Least-squares fit of control points to (t, point) samples on the given
// knots. With pins, the first head.size() and last tail.size() control
// points are fixed to the given values and excluded from the solve.
FitResult fitWithPinnedEnds(const std::vector<std::pair<double, Eigen::Vector3d>>& samples,
                            KnotVectorPtr knots, int degree,
                            const std::vector<Eigen::Vector3d>& head,
                            const std::vector<Eigen::Vector3d>& tail);

// Convenience wrapper pinning fixed_head_tail control points at each end to
// the first/last sample point (rest boundary convention).
FitResult fitFromSamples(const std::vector<std::pair<double, Eigen::Vector3d>>& samples,
                         KnotVectorPtr knots, int degree, int fixed_head_tail);

}  // namespace ringo
