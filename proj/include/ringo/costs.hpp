#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "ringo/arm.hpp"
#include "ringo/bspline.hpp"
#include "ringo/esdf.hpp"

namespace ringo {

// Coefficients of the two C1 piecewise-cubic penalty profiles. Each interior
// cubic piece b*x^2 + a*x^3 rises from (0, 0) with zero slope to the peak
// value f_d with zero slope, which pins a = -2 f_d / p^3 and b = 3 f_d / p^2
// for a piece whose shifted argument peaks at p.
struct PenaltyCoefficients {
  double a_o1 = 0, b_o1 = 0;  // radial, argument r on [0, r_d]
  double a_o2 = 0, b_o2 = 0;  // radial, argument r - r_max on [r_d, r_max]
  double a_l1 = 0, b_l1 = 0;  // vertical, argument z + r_max on [-r_max, -z_d]
  double a_l2 = 0, b_l2 = 0;  // vertical, argument z + r_min on [-z_d, -r_min]
};
PenaltyCoefficients derivePenaltyCoefficients(const WorkspaceParams& ws);

// Radial profile: 0 at r = 0, peak f_d at r_d, back to 0 at r_max, then
// quadratic growth outside the reach sphere. C1 everywhere.
double radialPenalty(const WorkspaceParams& ws, const PenaltyCoefficients& c, double r);
double radialPenaltySlope(const WorkspaceParams& ws, const PenaltyCoefficients& c, double r);

// Vertical profile in the relative z coordinate: quadratic growth below
// -r_max and above -r_min, peak f_d at -z_d, zeros at the slab faces.
double verticalPenalty(const WorkspaceParams& ws, const PenaltyCoefficients& c, double z);
double verticalPenaltySlope(const WorkspaceParams& ws, const PenaltyCoefficients& c, double z);

struct CostWeights {
  double smooth = 1.0;
  double workspace = 0.6;
  double yaw = 0.3;
  double obstacle = 8.0;
};

// Fixed data of the end-effector optimization problem: the guide curve
// (knot-aligned with the decision curve), workspace shape, obstacle field
// and thresholds. Instances are immutable and safe to share across threads.
class CostContext {
 public:
  CostContext(BSplineCurve guide, WorkspaceParams ws, CostWeights weights,
              std::shared_ptr<const EsdfGrid> esdf, double obstacle_threshold,
              double yaw_epsilon = 1e-6);

  const BSplineCurve& guide() const { return guide_; }
  const WorkspaceParams& workspace() const { return ws_; }
  const PenaltyCoefficients& coefficients() const { return coeffs_; }
  const CostWeights& weights() const { return weights_; }
  const EsdfGrid* esdf() const { return esdf_.get(); }
  double obstacleThreshold() const { return d_thr_; }
  double yawEpsilon() const { return yaw_eps_; }

  int degree() const { return guide_.degree(); }
  int numControlPoints() const { return guide_.numControlPoints(); }
  // Free (optimizable) control point indices are freeLo()..freeHi()
  // inclusive; everything outside is pinned by boundary conditions.
  int freeLo() const { return guide_.degree(); }
  int freeHi() const { return numControlPoints() - 1 - guide_.degree(); }
  bool isFree(int i) const { return i >= freeLo() && i <= freeHi(); }

  // Acceleration stencil for second-derivative index i (0-based).
  const AccelStencil& stencil(int i) const { return stencils_[static_cast<std::size_t>(i)]; }

 private:
  BSplineCurve guide_;
  WorkspaceParams ws_;
  PenaltyCoefficients coeffs_;
  CostWeights weights_;
  std::shared_ptr<const EsdfGrid> esdf_;
  double d_thr_;
  double yaw_eps_;
  std::vector<AccelStencil> stencils_;
};

// Each term writes its unweighted gradient (zeroing the buffer first) with
// entries for pinned control points exactly zero. q holds all control
// points of the end-effector curve, aligned with the guide's.
using ControlPoints = std::vector<Eigen::Vector3d>;

double smoothnessCost(const ControlPoints& q, const CostContext& ctx, ControlPoints* grad);
double workspaceCost(const ControlPoints& q, const CostContext& ctx, ControlPoints* grad);
double yawRateCost(const ControlPoints& q, const CostContext& ctx, ControlPoints* grad);
double obstacleCost(const ControlPoints& q, const CostContext& ctx, ControlPoints* grad);

struct CostReport {
  double total = 0;
  double smooth = 0;
  double workspace = 0;
  double yaw = 0;
  double obstacle = 0;
  ControlPoints gradient;  // weighted sum, pinned entries zero
};

CostReport totalCost(const ControlPoints& q, const CostContext& ctx, bool want_gradient = true);

}  // namespace ringo
