#include "ringo/bspline.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "ringo/errors.hpp"

namespace ringo {

namespace {
constexpr int kMaxDegree = 7;
}

KnotVector::KnotVector(std::vector<double> knots) : knots_(std::move(knots)) {
  if (knots_.size() < 4) throw ConfigError("knot vector needs at least 4 entries");
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (!(knots_[i] >= knots_[i - 1])) throw ConfigError("knot vector must be non-decreasing");
    if (!std::isfinite(knots_[i])) throw ConfigError("knot vector must be finite");
  }
}

std::shared_ptr<const KnotVector> KnotVector::clampedUniform(double t_start, double t_end,
                                                             int num_spans, int degree) {
  if (num_spans < 1 || degree < 1) throw ConfigError("clampedUniform: bad span/degree count");
  if (!(t_end > t_start)) throw ConfigError("clampedUniform: t_end must exceed t_start");
  std::vector<double> kn;
  kn.reserve(static_cast<std::size_t>(num_spans + 2 * degree + 1));
  for (int i = 0; i <= degree; ++i) kn.push_back(t_start);
  const double dt = (t_end - t_start) / num_spans;
  for (int i = 1; i < num_spans; ++i) kn.push_back(t_start + dt * i);
  for (int i = 0; i <= degree; ++i) kn.push_back(t_end);
  return std::make_shared<const KnotVector>(std::move(kn));
}

std::shared_ptr<const KnotVector> KnotVector::uniform(double t0, double dt, int count) {
  if (count < 4 || !(dt > 0.0)) throw ConfigError("uniform: bad knot count or spacing");
  std::vector<double> kn(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) kn[static_cast<std::size_t>(i)] = t0 + dt * i;
  return std::make_shared<const KnotVector>(std::move(kn));
}

namespace detail {

int findSpan(const KnotVector& knots, int degree, int n_ctrl, double t) {
  const auto& kn = knots.values();
  const int N = n_ctrl - 1;
  const double t0 = kn[static_cast<std::size_t>(degree)];
  const double t1 = kn[static_cast<std::size_t>(N + 1)];
  const double tol = 1e-9 * std::max(1.0, std::abs(t1 - t0));
  if (!(t >= t0 - tol) || !(t <= t1 + tol)) {
    std::ostringstream os;
    os << "parameter " << t << " outside curve domain [" << t0 << ", " << t1 << "]";
    throw DomainError(os.str());
  }
  t = std::clamp(t, t0, t1);
  int k = static_cast<int>(std::upper_bound(kn.begin(), kn.end(), t) - kn.begin()) - 1;
  return std::clamp(k, degree, N);
}

void basisFunctions(const KnotVector& knots, int degree, int k, double t, double* out) {
  const auto& kn = knots.values();
  double left[kMaxDegree + 1];
  double right[kMaxDegree + 1];
  out[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[j] = t - kn[static_cast<std::size_t>(k + 1 - j)];
    right[j] = kn[static_cast<std::size_t>(k + j)] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double den = right[r + 1] + left[j - r];
      const double tmp = (den != 0.0) ? out[r] / den : 0.0;  // 0/0 := 0 on repeated knots
      out[r] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    out[j] = saved;
  }
}

}  // namespace detail

BSplineCurve::BSplineCurve(int degree, std::vector<Eigen::Vector3d> control_points,
                           KnotVectorPtr knots)
    : degree_(degree), ctrl_(std::move(control_points)), knots_(std::move(knots)) {
  if (degree_ < 1 || degree_ > kMaxDegree) throw ConfigError("unsupported spline degree");
  if (!knots_) throw ConfigError("curve requires a knot vector");
  const int expected = static_cast<int>(ctrl_.size()) + degree_ + 1;
  if (knots_->size() != expected) {
    std::ostringstream os;
    os << "knot count " << knots_->size() << " does not match " << ctrl_.size()
       << " control points of degree " << degree_ << " (expected " << expected << ")";
    throw ConfigError(os.str());
  }
  if (!(domainEnd() > domainStart())) throw ConfigError("curve has an empty domain");
}

Eigen::Vector3d BSplineCurve::evaluate(double t) const {
  const int k = detail::findSpan(*knots_, degree_, numControlPoints(), t);
  double b[kMaxDegree + 1];
  detail::basisFunctions(*knots_, degree_, k, std::clamp(t, domainStart(), domainEnd()), b);
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  for (int i = 0; i <= degree_; ++i) p += b[i] * ctrl_[static_cast<std::size_t>(k - degree_ + i)];
  return p;
}

BSplineCurve BSplineCurve::derivative() const {
  if (degree_ < 2) throw ConfigError("derivative would drop below degree 1");
  const auto& kn = knots_->values();
  const int N = numControlPoints() - 1;
  std::vector<Eigen::Vector3d> d(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    const double span = kn[static_cast<std::size_t>(i + degree_ + 1)] - kn[static_cast<std::size_t>(i + 1)];
    d[static_cast<std::size_t>(i)] =
        span > 0.0 ? Eigen::Vector3d(degree_ * (ctrl_[static_cast<std::size_t>(i + 1)] -
                                                ctrl_[static_cast<std::size_t>(i)]) /
                                     span)
                   : Eigen::Vector3d::Zero();
  }
  std::vector<double> sub(kn.begin() + 1, kn.end() - 1);
  return BSplineCurve(degree_ - 1, std::move(d), std::make_shared<const KnotVector>(std::move(sub)));
}

std::vector<Eigen::Vector3d> BSplineCurve::segmentHull(int segment_index) const {
  if (segment_index < 0 || segment_index >= numSegments())
    throw std::out_of_range("segment index out of range");
  return {ctrl_.begin() + segment_index, ctrl_.begin() + segment_index + degree_ + 1};
}

int BSplineCurve::segmentOfParameter(double t) const {
  return detail::findSpan(*knots_, degree_, numControlPoints(), t) - degree_;
}

std::vector<std::pair<double, Eigen::Vector3d>> BSplineCurve::sampleUniform(int count) const {
  if (count < 2) throw ConfigError("sampleUniform needs at least 2 samples");
  std::vector<std::pair<double, Eigen::Vector3d>> out;
  out.reserve(static_cast<std::size_t>(count));
  const double t0 = domainStart(), t1 = domainEnd();
  for (int i = 0; i < count; ++i) {
    const double t = t0 + (t1 - t0) * (static_cast<double>(i) / (count - 1));
    out.emplace_back(t, evaluate(t));
  }
  return out;
}

BSplineCurve subtract(const BSplineCurve& a, const BSplineCurve& b) {
  if (a.degree() != b.degree()) throw IncompatibleCurves("subtract: order mismatch");
  if (a.numControlPoints() != b.numControlPoints())
    throw IncompatibleCurves("subtract: control point count mismatch");
  if (a.knots() != b.knots() && a.knots()->values() != b.knots()->values())
    throw IncompatibleCurves("subtract: knot vectors differ");
  std::vector<Eigen::Vector3d> diff(static_cast<std::size_t>(a.numControlPoints()));
  for (std::size_t i = 0; i < diff.size(); ++i)
    diff[i] = a.controlPoints()[i] - b.controlPoints()[i];
  return BSplineCurve(a.degree(), std::move(diff), a.knots());
}

AccelStencil accelStencil(const KnotVector& knots, int degree, int i) {
  if (degree < 2) throw ConfigError("acceleration stencil needs degree >= 2");
  const auto& kn = knots.values();
  const auto at = [&kn](int j) { return kn[static_cast<std::size_t>(j)]; };
  const double span_mid = at(i + degree + 1) - at(i + 2);  // spans the middle difference
  const double span_lo = at(i + degree + 1) - at(i + 1);
  const double span_hi = at(i + degree + 2) - at(i + 2);
  if (!(span_mid > 0.0) || !(span_lo > 0.0) || !(span_hi > 0.0)) {
    std::ostringstream os;
    os << "zero knot span in acceleration stencil at index " << i;
    throw SingularSpan(os.str());
  }
  const double c = static_cast<double>(degree) * (degree - 1);
  AccelStencil m{};
  m.m0 = c / (span_mid * span_lo);
  m.m2 = c / (span_mid * span_hi);
  m.m1 = -(m.m0 + m.m2);
  return m;
}

std::vector<Eigen::Vector3d> accelControlPoints(const BSplineCurve& curve) {
  const int N = curve.numControlPoints() - 1;
  if (N < 2) throw ConfigError("need at least 3 control points for acceleration");
  std::vector<Eigen::Vector3d> acc(static_cast<std::size_t>(N - 1));
  const auto& P = curve.controlPoints();
  for (int i = 0; i <= N - 2; ++i) {
    const AccelStencil m = accelStencil(*curve.knots(), curve.degree(), i);
    acc[static_cast<std::size_t>(i)] = m.m0 * P[static_cast<std::size_t>(i)] +
                                       m.m1 * P[static_cast<std::size_t>(i + 1)] +
                                       m.m2 * P[static_cast<std::size_t>(i + 2)];
  }
  return acc;
}

FitResult fitWithPinnedEnds(const std::vector<std::pair<double, Eigen::Vector3d>>& samples,
                            KnotVectorPtr knots, int degree,
                            const std::vector<Eigen::Vector3d>& head,
                            const std::vector<Eigen::Vector3d>& tail) {
  if (!knots) throw ConfigError("fit requires a knot vector");
  const int n_ctrl = knots->size() - degree - 1;
  if (n_ctrl < degree + 1) throw ConfigError("fit: too few control points for degree");
  const int h = static_cast<int>(head.size());
  const int g = static_cast<int>(tail.size());
  if (h + g > n_ctrl) throw FitError("fit: more pinned control points than control points");
  const int n_free = n_ctrl - h - g;
  const int n_samp = static_cast<int>(samples.size());
  if (n_samp < std::max(n_free, 2)) throw FitError("fit: not enough samples");

  const double t0 = (*knots)[degree];
  const double t1 = (*knots)[n_ctrl];
  const double tol = 1e-9 * std::max(1.0, std::abs(t1 - t0));
  for (const auto& s : samples) {
    if (!(s.first >= t0 - tol) || !(s.first <= t1 + tol))
      throw FitError("fit: sample parameter outside knot domain");
  }

  std::vector<Eigen::Vector3d> ctrl(static_cast<std::size_t>(n_ctrl), Eigen::Vector3d::Zero());
  for (int i = 0; i < h; ++i) ctrl[static_cast<std::size_t>(i)] = head[static_cast<std::size_t>(i)];
  for (int i = 0; i < g; ++i)
    ctrl[static_cast<std::size_t>(n_ctrl - g + i)] = tail[static_cast<std::size_t>(i)];

  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n_samp, 3);
  Eigen::MatrixXd A;
  if (n_free > 0) A = Eigen::MatrixXd::Zero(n_samp, n_free);
  double b[kMaxDegree + 1];
  for (int r = 0; r < n_samp; ++r) {
    const double t = std::clamp(samples[static_cast<std::size_t>(r)].first, t0, t1);
    const int k = detail::findSpan(*knots, degree, n_ctrl, t);
    detail::basisFunctions(*knots, degree, k, t, b);
    rhs.row(r) = samples[static_cast<std::size_t>(r)].second.transpose();
    for (int j = 0; j <= degree; ++j) {
      const int idx = k - degree + j;
      if (idx >= h && idx < n_ctrl - g) {
        A(r, idx - h) = b[j];
      } else {
        rhs.row(r) -= b[j] * ctrl[static_cast<std::size_t>(idx)].transpose();
      }
    }
  }

  double sq_residual = 0.0;
  if (n_free > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < n_free)
      throw FitError("fit: sample placement leaves the system rank-deficient");
    const Eigen::MatrixXd X = qr.solve(rhs);
    for (int i = 0; i < n_free; ++i)
      ctrl[static_cast<std::size_t>(h + i)] = X.row(i).transpose();
    sq_residual = (A * X - rhs).squaredNorm();
  } else {
    sq_residual = rhs.squaredNorm();
  }

  BSplineCurve curve(degree, std::move(ctrl), std::move(knots));
  return FitResult{std::move(curve), std::sqrt(sq_residual / n_samp)};
}

FitResult fitFromSamples(const std::vector<std::pair<double, Eigen::Vector3d>>& samples,
                         KnotVectorPtr knots, int degree, int fixed_head_tail) {
  if (fixed_head_tail < 0) throw ConfigError("fit: negative pin count");
  if (samples.empty()) throw FitError("fit: no samples");
  const std::vector<Eigen::Vector3d> head(static_cast<std::size_t>(fixed_head_tail),
                                          samples.front().second);
  const std::vector<Eigen::Vector3d> tail(static_cast<std::size_t>(fixed_head_tail),
                                          samples.back().second);
  return fitWithPinnedEnds(samples, std::move(knots), degree, head, tail);
}

}  // namespace ringo
