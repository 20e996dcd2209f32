#pragma once

#include <Eigen/Core>
#include <vector>

#include "ringo/arm.hpp"
#include "ringo/bspline.hpp"
#include "ringo/costs.hpp"
#include "ringo/esdf.hpp"
#include "ringo/lbfgs.hpp"

namespace ringo {

// Quadratic Bezier over a normalized parameter s in [0, 1].
struct QuadraticBezier {
  Eigen::Vector3d p0, p1, p2;
  Eigen::Vector3d evaluate(double s) const;
};

// Scale applied to the mean of the two relative end-effector endpoints when
// placing the middle Bezier control point: log((angle + 1) / 2 + 1) with
// angle = arccos of the clamped dot product of the normalized endpoints.
// Monotone in the angle, log(1.5) when the endpoints are aligned and above 1
// when they oppose, so the farther apart the endpoints point, the harder the
// initial arc is pushed away from the body.
double bezierLambda(const Eigen::Vector3d& xve_start, const Eigen::Vector3d& xve_goal);

// Initial relative-motion arc {start, lambda/2 * (start + goal), goal}.
// Throws InputError when either endpoint is the zero vector, since the
// blending scale needs their directions.
QuadraticBezier bezierInit(const Eigen::Vector3d& xve_start, const Eigen::Vector3d& xve_goal);

// Least-squares fit of the end-effector curve seed onto the guide's knots:
// samples guide(t) + bezier(s(t)) with s mapping the guide domain onto
// [0, 1], then pins the first and last degree control points so the relative
// curve starts and ends at the requested offsets with zero relative
// velocity. Shares the guide's knot vector by identity.
BSplineCurve buildInitialQ(const BSplineCurve& guide, const QuadraticBezier& bezier,
                           int samples_per_span = 8);

struct OptimizeOutcome {
  BSplineCurve curve;
  LbfgsStatus status = LbfgsStatus::GradientConverged;
  int iterations = 0;
  int evaluations = 0;
  CostReport initial_cost;
  CostReport final_cost;
  std::vector<double> cost_trace;  // accepted iterate costs, initial first
};

// Minimizes the total cost over the free control points; pinned control
// points pass through bit-exactly and the accepted cost sequence is
// non-increasing. A non-finite cost at the seed raises NumericalError;
// non-finite trial steps later on are rejected by the line search, so the
// returned curve is always the best finite iterate seen.
OptimizeOutcome optimize(const BSplineCurve& initial_q, const CostContext& ctx,
                         const LbfgsParams& params = {});

struct VerifyReport {
  // All relative-curve control points inside the workspace (with margin):
  // by the convex hull property this certifies the whole relative curve.
  bool workspace_ok = false;
  // Dense samples of body and end-effector paths clear their radii.
  bool collision_ok = false;
  double max_workspace_violation = 0.0;  // over control points, m
  double min_body_distance = 0.0;        // over samples, m
  double min_ee_distance = 0.0;          // over samples, m
};

VerifyReport verify(const BSplineCurve& ee_curve, const BSplineCurve& guide,
                    const WorkspaceParams& ws, const EsdfGrid& esdf, double body_clearance,
                    double ee_clearance, double workspace_margin = 0.0,
                    int samples_per_span = 40);

struct JointSample {
  double t = 0;
  double psi = 0;  // unwrapped: continuous across samples, may leave (-pi, pi]
  double theta1 = 0;
  double theta2 = 0;
};

// Per-sample inverse kinematics of the relative curve at the given rate.
// The elbow branch is chosen at the first sample and locked for the rest;
// psi is unwrapped so consecutive samples never jump by 2*pi. Throws
// ReachabilityError naming the time of the first unreachable sample.
std::vector<JointSample> extractJointTrajectory(const BSplineCurve& relative_curve,
                                                const ArmGeometry& geom, double rate_hz = 100.0);

struct EePlanRequest {
  Eigen::Vector3d xve_start{0, 0, -0.35};
  Eigen::Vector3d xve_goal{0, 0, -0.35};
  int fit_samples_per_span = 8;
  int check_samples_per_span = 40;
  double body_clearance = 0.3;  // m, body path must clear obstacles by this
  double ee_clearance = 0.1;    // m, end-effector path likewise
  double workspace_margin = 0.0;
  double joint_rate_hz = 100.0;
  LbfgsParams optimizer;
  void validate() const;  // throws ConfigError
};

struct EePlanDiagnostics {
  LbfgsStatus status = LbfgsStatus::GradientConverged;
  int iterations = 0;
  int evaluations = 0;
  CostReport initial_cost;
  CostReport final_cost;
  std::vector<double> cost_trace;
  // seed construction plus optimization; excludes post checks and sampling
  double wall_time_ms = 0.0;
};

struct EePlanResult {
  BSplineCurve ee_curve;        // world frame, shares the guide's knots
  BSplineCurve relative_curve;  // ee_curve minus guide, control point wise
  VerifyReport checks;
  // Present when the workspace check passed; reachability inside the
  // workspace then guarantees inverse kinematics succeeds at every sample.
  std::vector<JointSample> joint_trajectory;
  EePlanDiagnostics diagnostics;
};

// Full pipeline: Bezier seed, fit onto the guide knots, gradient-based
// refinement, post checks, joint extraction. The request endpoints must lie
// inside the workspace and the guide must carry at least 2*(degree+1)
// control points so both ends can be pinned independently.
EePlanResult planEndEffector(const CostContext& ctx, const ArmGeometry& geom,
                             const EePlanRequest& req);

}  // namespace ringo
