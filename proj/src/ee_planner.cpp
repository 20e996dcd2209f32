#include "ringo/ee_planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <utility>

#include "ringo/errors.hpp"

namespace ringo {

Eigen::Vector3d QuadraticBezier::evaluate(double s) const {
  const double u = 1.0 - s;
  return u * u * p0 + 2.0 * u * s * p1 + s * s * p2;
}

double bezierLambda(const Eigen::Vector3d& xve_start, const Eigen::Vector3d& xve_goal) {
  const double ns = xve_start.norm(), ng = xve_goal.norm();
  if (ns == 0.0 || ng == 0.0)
    throw InputError("relative end-effector endpoints must be nonzero to seed the arc");
  const double d = std::clamp(xve_start.dot(xve_goal) / (ns * ng), -1.0, 1.0);
  return std::log(0.5 * (std::acos(d) + 1.0) + 1.0);
}

QuadraticBezier bezierInit(const Eigen::Vector3d& xve_start, const Eigen::Vector3d& xve_goal) {
  const double lambda = bezierLambda(xve_start, xve_goal);
  return {xve_start, 0.5 * lambda * (xve_start + xve_goal), xve_goal};
}

BSplineCurve buildInitialQ(const BSplineCurve& guide, const QuadraticBezier& bezier,
                           int samples_per_span) {
  if (samples_per_span < 1) throw ConfigError("fit sample density must be at least 1 per span");
  const int degree = guide.degree();
  const int n_ctrl = guide.numControlPoints();
  const int count = std::max(samples_per_span * guide.numSegments() + 1, 2 * n_ctrl);
  const double t0 = guide.domainStart();
  const double dur = guide.duration();

  std::vector<std::pair<double, Eigen::Vector3d>> samples = guide.sampleUniform(count);
  for (auto& [t, p] : samples) {
    const double s = dur > 0.0 ? (t - t0) / dur : 0.0;
    p += bezier.evaluate(s);
  }

  const auto& x = guide.controlPoints();
  std::vector<Eigen::Vector3d> head, tail;
  for (int i = 0; i < degree; ++i) head.push_back(x[static_cast<std::size_t>(i)] + bezier.p0);
  for (int i = n_ctrl - degree; i < n_ctrl; ++i)
    tail.push_back(x[static_cast<std::size_t>(i)] + bezier.p2);

  return fitWithPinnedEnds(samples, guide.knots(), degree, head, tail).curve;
}

OptimizeOutcome optimize(const BSplineCurve& initial_q, const CostContext& ctx,
                         const LbfgsParams& params) {
  const int lo = ctx.freeLo(), hi = ctx.freeHi();
  const int n_free = hi - lo + 1;
  if (initial_q.numControlPoints() != ctx.numControlPoints() ||
      initial_q.knots() != ctx.guide().knots())
    throw IncompatibleCurves("seed curve does not share the guide's knots");
  if (n_free < 1) throw InputError("curve has no free control points to optimize");

  ControlPoints q = initial_q.controlPoints();
  auto objective = [&](const Eigen::VectorXd& v, Eigen::VectorXd& grad) {
    for (int i = 0; i < n_free; ++i) q[static_cast<std::size_t>(lo + i)] = v.segment<3>(3 * i);
    const CostReport rep = totalCost(q, ctx, true);
    grad.resize(v.size());
    for (int i = 0; i < n_free; ++i)
      grad.segment<3>(3 * i) = rep.gradient[static_cast<std::size_t>(lo + i)];
    return rep.total;
  };

  Eigen::VectorXd v0(3 * n_free);
  for (int i = 0; i < n_free; ++i) v0.segment<3>(3 * i) = q[static_cast<std::size_t>(lo + i)];

  OptimizeOutcome out{initial_q, LbfgsStatus::GradientConverged, 0, 0, {}, {}, {}};
  const LbfgsResult res = minimize(objective, v0, params, [&](int, double f, double) {
    out.cost_trace.push_back(f);
  });

  ControlPoints q_final = initial_q.controlPoints();
  for (int i = 0; i < n_free; ++i)
    q_final[static_cast<std::size_t>(lo + i)] = res.x.segment<3>(3 * i);

  out.curve = BSplineCurve(initial_q.degree(), q_final, initial_q.knots());
  out.status = res.status;
  out.iterations = res.iterations;
  out.evaluations = res.evaluations;
  out.initial_cost = totalCost(initial_q.controlPoints(), ctx, false);
  out.final_cost = totalCost(q_final, ctx, false);
  if (out.cost_trace.empty() || out.cost_trace.back() != res.f) out.cost_trace.push_back(res.f);
  return out;
}

VerifyReport verify(const BSplineCurve& ee_curve, const BSplineCurve& guide,
                    const WorkspaceParams& ws, const EsdfGrid& esdf, double body_clearance,
                    double ee_clearance, double workspace_margin, int samples_per_span) {
  if (ee_curve.numControlPoints() != guide.numControlPoints() ||
      ee_curve.knots() != guide.knots())
    throw IncompatibleCurves("end-effector curve does not share the guide's knots");

  VerifyReport rep;
  rep.workspace_ok = true;
  const auto& q = ee_curve.controlPoints();
  const auto& x = guide.controlPoints();
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Eigen::Vector3d e = q[i] - x[i];
    rep.workspace_ok = rep.workspace_ok && workspaceContains(ws, e, workspace_margin);
    rep.max_workspace_violation = std::max(rep.max_workspace_violation, workspaceViolation(ws, e));
  }

  const int count = std::max(2, samples_per_span * guide.numSegments() + 1);
  rep.min_body_distance = esdf.maxDistance();
  rep.min_ee_distance = esdf.maxDistance();
  for (const auto& [t, p] : guide.sampleUniform(count))
    rep.min_body_distance = std::min(rep.min_body_distance, esdf.query(p).distance);
  for (const auto& [t, p] : ee_curve.sampleUniform(count))
    rep.min_ee_distance = std::min(rep.min_ee_distance, esdf.query(p).distance);
  rep.collision_ok =
      rep.min_body_distance > body_clearance && rep.min_ee_distance > ee_clearance;
  return rep;
}

std::vector<JointSample> extractJointTrajectory(const BSplineCurve& relative_curve,
                                                const ArmGeometry& geom, double rate_hz) {
  if (rate_hz <= 0.0) throw ConfigError("joint sample rate must be positive");
  const double t0 = relative_curve.domainStart();
  const double t_end = relative_curve.domainEnd();

  std::vector<double> times;
  for (int k = 0;; ++k) {
    const double t = t0 + k / rate_hz;
    if (t >= t_end - 1e-12) break;
    times.push_back(t);
  }
  times.push_back(t_end);

  std::vector<JointSample> out;
  out.reserve(times.size());
  ElbowBranch branch = ElbowBranch::Up;
  double psi_prev = 0.0;
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    const Eigen::Vector3d target = relative_curve.evaluate(t);
    GeneralizedJoint j;
    try {
      j = k == 0 ? inverseKinematics(geom, target, ElbowBranch::Up, &branch)
                 : inverseKinematicsBranch(geom, target, branch);
    } catch (const Error& e) {
      char msg[160];
      std::snprintf(msg, sizeof msg, "inverse kinematics failed at t=%.4f: %s", t, e.what());
      throw ReachabilityError(msg);
    }
    double psi = j.psi + two_pi * std::round((psi_prev - j.psi) / two_pi);
    double theta1 = j.theta1;
    if (k > 0) {
      // The same point is also reached by yawing half a turn and tilting the
      // chain through vertical: (psi + pi, theta1 - 2*phi, theta2) with
      // phi = atan2(radial, -z). Near the vertical axis the target azimuth
      // can swing arbitrarily fast between samples, so take whichever of the
      // two exact solutions keeps the yaw command closer to the previous
      // sample; this bounds every yaw step by pi/2.
      const Eigen::Vector3d v = target - geom.mount_offset;
      const double radial = std::hypot(v.x(), v.y());
      if (radial < 1e-12) {
        // on the axis (to within noise) any yaw reaches the target: hold
        psi = psi_prev;
      } else {
        const double phi = std::atan2(radial, -v.z());
        const double psi_flip = j.psi + std::numbers::pi;
        const double theta1_flip = j.theta1 - 2.0 * phi;
        const double psi_b = psi_flip + two_pi * std::round((psi_prev - psi_flip) / two_pi);
        const bool flip_valid = theta1_flip >= geom.theta1_limits[0] &&
                                theta1_flip <= geom.theta1_limits[1];
        if (flip_valid && std::abs(psi_b - psi_prev) < std::abs(psi - psi_prev)) {
          psi = psi_b;
          theta1 = theta1_flip;
        }
      }
    }
    psi_prev = psi;
    out.push_back({t, psi, theta1, j.theta2});
  }
  return out;
}

void EePlanRequest::validate() const {
  if (fit_samples_per_span < 1 || check_samples_per_span < 1)
    throw ConfigError("sample densities must be at least 1 per span");
  if (body_clearance < 0 || ee_clearance < 0)
    throw ConfigError("clearance radii must be non-negative");
  if (joint_rate_hz <= 0) throw ConfigError("joint sample rate must be positive");
}

EePlanResult planEndEffector(const CostContext& ctx, const ArmGeometry& geom,
                             const EePlanRequest& req) {
  req.validate();
  const BSplineCurve& guide = ctx.guide();
  if (guide.numControlPoints() < 2 * (guide.degree() + 1))
    throw InputError("guide is too short to pin both curve ends independently");
  if (!workspaceContains(ctx.workspace(), req.xve_start))
    throw InputError("requested start offset lies outside the end-effector workspace");
  if (!workspaceContains(ctx.workspace(), req.xve_goal))
    throw InputError("requested goal offset lies outside the end-effector workspace");

  const auto t_begin = std::chrono::steady_clock::now();
  const QuadraticBezier bezier = bezierInit(req.xve_start, req.xve_goal);
  const BSplineCurve seed = buildInitialQ(guide, bezier, req.fit_samples_per_span);
  OptimizeOutcome opt = optimize(seed, ctx, req.optimizer);
  const auto t_done = std::chrono::steady_clock::now();

  BSplineCurve relative = subtract(opt.curve, guide);
  const VerifyReport checks =
      verify(opt.curve, guide, ctx.workspace(), *ctx.esdf(), req.body_clearance,
             req.ee_clearance, req.workspace_margin, req.check_samples_per_span);

  std::vector<JointSample> joints;
  if (checks.workspace_ok) joints = extractJointTrajectory(relative, geom, req.joint_rate_hz);

  EePlanDiagnostics diag;
  diag.status = opt.status;
  diag.iterations = opt.iterations;
  diag.evaluations = opt.evaluations;
  diag.initial_cost = opt.initial_cost;
  diag.final_cost = opt.final_cost;
  diag.cost_trace = std::move(opt.cost_trace);
  diag.wall_time_ms = std::chrono::duration<double, std::milli>(t_done - t_begin).count();

  return {std::move(opt.curve), std::move(relative), checks, std::move(joints), std::move(diag)};
}

}  // namespace ringo
