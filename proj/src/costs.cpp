#include "ringo/costs.hpp"

#include <algorithm>
#include <cmath>

#include "ringo/errors.hpp"

namespace ringo {

PenaltyCoefficients derivePenaltyCoefficients(const WorkspaceParams& ws) {
  ws.validate();
  PenaltyCoefficients c;
  const auto rise = [&ws](double peak_arg, double& a, double& b) {
    a = -2.0 * ws.f_d / (peak_arg * peak_arg * peak_arg);
    b = 3.0 * ws.f_d / (peak_arg * peak_arg);
  };
  rise(ws.r_d, c.a_o1, c.b_o1);
  rise(ws.r_d - ws.r_max, c.a_o2, c.b_o2);
  rise(ws.r_max - ws.z_d, c.a_l1, c.b_l1);
  rise(ws.r_min - ws.z_d, c.a_l2, c.b_l2);
  return c;
}

double radialPenalty(const WorkspaceParams& ws, const PenaltyCoefficients& c, double r) {
  if (r <= ws.r_d) return c.b_o1 * r * r + c.a_o1 * r * r * r;
  const double u = r - ws.r_max;
  if (r <= ws.r_max) return c.b_o2 * u * u + c.a_o2 * u * u * u;
  return u * u;
}

double radialPenaltySlope(const WorkspaceParams& ws, const PenaltyCoefficients& c, double r) {
  if (r <= ws.r_d) return 2.0 * c.b_o1 * r + 3.0 * c.a_o1 * r * r;
  const double u = r - ws.r_max;
  if (r <= ws.r_max) return 2.0 * c.b_o2 * u + 3.0 * c.a_o2 * u * u;
  return 2.0 * u;
}

double verticalPenalty(const WorkspaceParams& ws, const PenaltyCoefficients& c, double z) {
  if (z <= -ws.r_max) {
    const double w = z + ws.r_max;
    return w * w;
  }
  if (z <= -ws.z_d) {
    const double w = z + ws.r_max;
    return c.b_l1 * w * w + c.a_l1 * w * w * w;
  }
  const double v = z + ws.r_min;
  if (z <= -ws.r_min) return c.b_l2 * v * v + c.a_l2 * v * v * v;
  return v * v;
}

double verticalPenaltySlope(const WorkspaceParams& ws, const PenaltyCoefficients& c, double z) {
  if (z <= -ws.r_max) return 2.0 * (z + ws.r_max);
  if (z <= -ws.z_d) {
    const double w = z + ws.r_max;
    return 2.0 * c.b_l1 * w + 3.0 * c.a_l1 * w * w;
  }
  const double v = z + ws.r_min;
  if (z <= -ws.r_min) return 2.0 * c.b_l2 * v + 3.0 * c.a_l2 * v * v;
  return 2.0 * v;
}

CostContext::CostContext(BSplineCurve guide, WorkspaceParams ws, CostWeights weights,
                         std::shared_ptr<const EsdfGrid> esdf, double obstacle_threshold,
                         double yaw_epsilon)
    : guide_(std::move(guide)),
      ws_(ws),
      coeffs_(derivePenaltyCoefficients(ws)),
      weights_(weights),
      esdf_(std::move(esdf)),
      d_thr_(obstacle_threshold),
      yaw_eps_(yaw_epsilon) {
  if (weights_.smooth < 0 || weights_.workspace < 0 || weights_.yaw < 0 ||
      weights_.obstacle < 0)
    throw ConfigError("cost weights must be non-negative");
  if (!(yaw_eps_ > 0)) throw ConfigError("yaw regularization must be positive");
  const int s = guide_.degree();
  const int N = guide_.numControlPoints() - 1;
  if (N + 1 < 2 * s + 2) throw ConfigError("too few control points to leave any free");
  stencils_.resize(static_cast<std::size_t>(N - 1));
  for (int i = 0; i <= N - 2; ++i)
    stencils_[static_cast<std::size_t>(i)] = accelStencil(*guide_.knots(), s, i);
}

namespace {

void checkSizes(const ControlPoints& q, const CostContext& ctx, ControlPoints* grad) {
  if (static_cast<int>(q.size()) != ctx.numControlPoints())
    throw IncompatibleCurves("cost: control point count does not match the guide");
  if (grad) grad->assign(q.size(), Eigen::Vector3d::Zero());
}

// Regularized horizontal direction and its (symmetric) Jacobian block.
struct YawDirection {
  Eigen::Vector3d n;
  Eigen::Matrix2d jac;
};

YawDirection yawDirection(const Eigen::Vector3d& e, double eps) {
  YawDirection out;
  const double ex = e.x(), ey = e.y();
  const double m2 = ex * ex + ey * ey + eps * eps;
  const double m = std::sqrt(m2);
  out.n = Eigen::Vector3d(ex / m, ey / m, 0.0);
  const double m3 = m2 * m;
  out.jac << (ey * ey + eps * eps) / m3, -ex * ey / m3, -ex * ey / m3,
      (ex * ex + eps * eps) / m3;
  return out;
}

// Obstacle sample with the out-of-grid convention: zero distance, gradient
// pointing back into the grid.
void obstacleSample(const EsdfGrid& esdf, const Eigen::Vector3d& p, double& d,
                    Eigen::Vector3d& grad) {
  const EsdfQuery q = esdf.query(p);
  if (!q.clamped) {
    d = q.distance;
    grad = q.gradient;
    return;
  }
  d = 0.0;
  const Eigen::Vector3d lo = esdf.origin();
  const Eigen::Vector3d hi =
      esdf.origin() + esdf.resolution() * Eigen::Vector3d(esdf.nx(), esdf.ny(), esdf.nz());
  const Eigen::Vector3d inside = p.cwiseMax(lo).cwiseMin(hi);
  const Eigen::Vector3d dir = inside - p;
  grad = dir.norm() > 1e-12 ? dir.normalized() : Eigen::Vector3d::Zero();
}

}  // namespace

double smoothnessCost(const ControlPoints& q, const CostContext& ctx, ControlPoints* grad) {
  checkSizes(q, ctx, grad);
  const auto& x = ctx.guide().controlPoints();
  const int s = ctx.degree();
  const int N = ctx.numControlPoints() - 1;
  double value = 0.0;
  for (int i = s - 2; i <= N - s; ++i) {
    const AccelStencil& m = ctx.stencil(i);
    const Eigen::Vector3d a =
        m.m0 * (q[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(i)]) +
        m.m1 * (q[static_cast<std::size_t>(i + 1)] - x[static_cast<std::size_t>(i + 1)]) +
        m.m2 * (q[static_cast<std::size_t>(i + 2)] - x[static_cast<std::size_t>(i + 2)]);
    value += a.squaredNorm();
    if (grad) {
      const double mm[3] = {m.m0, m.m1, m.m2};
      for (int o = 0; o < 3; ++o) {
        const int j = i + o;
        if (ctx.isFree(j)) (*grad)[static_cast<std::size_t>(j)] += 2.0 * mm[o] * a;
      }
    }
  }
  return value;
}

double workspaceCost(const ControlPoints& q, const CostContext& ctx, ControlPoints* grad) {
  checkSizes(q, ctx, grad);
  const auto& x = ctx.guide().controlPoints();
  const WorkspaceParams& ws = ctx.workspace();
  const PenaltyCoefficients& c = ctx.coefficients();
  double value = 0.0;
  for (int i = ctx.freeLo(); i <= ctx.freeHi(); ++i) {
    const Eigen::Vector3d e = q[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(i)];
    const double r = e.norm();
    const double fo = radialPenalty(ws, c, r);
    const double fl = verticalPenalty(ws, c, e.z());
    const double a = ws.h_o * fo;
    const double b = ws.h_l * fl;
    const double hi = std::max(a, b), lo = std::min(a, b);
    value += hi + std::log1p(std::exp(ws.k * (lo - hi))) / ws.k;
    if (grad) {
      // softmax weights of the two exponentials
      const double sig = 1.0 / (1.0 + std::exp(ws.k * (b - a)));
      const double w_o = ws.h_o * sig;
      const double w_l = ws.h_l * (1.0 - sig);
      Eigen::Vector3d g = Eigen::Vector3d::Zero();
      if (r > 0.0) g += w_o * radialPenaltySlope(ws, c, r) * (e / r);
      g.z() += w_l * verticalPenaltySlope(ws, c, e.z());
      (*grad)[static_cast<std::size_t>(i)] += g;
    }
  }
  return value;
}

double yawRateCost(const ControlPoints& q, const CostContext& ctx, ControlPoints* grad) {
  checkSizes(q, ctx, grad);
  const auto& x = ctx.guide().controlPoints();
  const double eps = ctx.yawEpsilon();
  double value = 0.0;
  for (int i = ctx.freeLo(); i <= ctx.freeHi() - 1; ++i) {
    const Eigen::Vector3d ea =
        q[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(i)];
    const Eigen::Vector3d eb =
        q[static_cast<std::size_t>(i + 1)] - x[static_cast<std::size_t>(i + 1)];
    const YawDirection da = yawDirection(ea, eps);
    const YawDirection db = yawDirection(eb, eps);
    const Eigen::Vector3d diff = db.n - da.n;
    value += diff.squaredNorm();
    if (grad) {
      const Eigen::Vector2d d2(diff.x(), diff.y());
      const Eigen::Vector2d ga = -2.0 * (da.jac * d2);
      const Eigen::Vector2d gb = 2.0 * (db.jac * d2);
      (*grad)[static_cast<std::size_t>(i)] += Eigen::Vector3d(ga.x(), ga.y(), 0.0);
      (*grad)[static_cast<std::size_t>(i + 1)] += Eigen::Vector3d(gb.x(), gb.y(), 0.0);
    }
  }
  return value;
}

double obstacleCost(const ControlPoints& q, const CostContext& ctx, ControlPoints* grad) {
  checkSizes(q, ctx, grad);
  const EsdfGrid* esdf = ctx.esdf();
  if (!esdf) return 0.0;
  const double thr = ctx.obstacleThreshold();
  double value = 0.0;
  for (int i = ctx.freeLo(); i <= ctx.freeHi(); ++i) {
    double d;
    Eigen::Vector3d dgrad;
    obstacleSample(*esdf, q[static_cast<std::size_t>(i)], d, dgrad);
    if (d <= thr) {
      value += (d - thr) * (d - thr);
      if (grad) (*grad)[static_cast<std::size_t>(i)] += 2.0 * (d - thr) * dgrad;
    }
  }
  return value;
}

CostReport totalCost(const ControlPoints& q, const CostContext& ctx, bool want_gradient) {
  CostReport report;
  ControlPoints scratch;
  ControlPoints* g = want_gradient ? &scratch : nullptr;
  if (want_gradient) report.gradient.assign(q.size(), Eigen::Vector3d::Zero());
  const CostWeights& w = ctx.weights();

  const auto accumulate = [&](double weight, double value) {
    if (want_gradient && weight != 0.0)
      for (std::size_t i = 0; i < q.size(); ++i) report.gradient[i] += weight * scratch[i];
    return weight * value;
  };

  report.smooth = smoothnessCost(q, ctx, g);
  report.total += accumulate(w.smooth, report.smooth);
  report.workspace = workspaceCost(q, ctx, g);
  report.total += accumulate(w.workspace, report.workspace);
  report.yaw = yawRateCost(q, ctx, g);
  report.total += accumulate(w.yaw, report.yaw);
  report.obstacle = obstacleCost(q, ctx, g);
  report.total += accumulate(w.obstacle, report.obstacle);
  if (!std::isfinite(report.total)) throw NumericalError("cost evaluated to a non-finite value");
  return report;
}

}  // namespace ringo
