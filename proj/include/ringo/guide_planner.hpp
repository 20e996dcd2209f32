#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "ringo/bspline.hpp"
#include "ringo/esdf.hpp"

namespace ringo {

struct GuideConfig {
  double inflation = 0.3;       // required clearance of the body center (m)
  double v_max = 2.0;           // speed limit for time allocation (m/s)
  double a_max = 2.0;           // acceleration limit (m/s^2)
  double span_dt = 0.5;         // target knot span duration (s)
  int min_spans = 5;            // lower bound on spans so ends stay pinnable
  double hover_duration = 2.0;  // duration of a zero-length trajectory (s)
  double refine_margin = 0.1;  // clearance hinge targets inflation + this
  double w_smooth = 1.0;
  // heavy by design: saturated hinge cost w_clear*(inflation+margin)^2 per
  // trapped control point must dominate any smoothness gain, or the line
  // search can jump a thin obstacle onto the zero-distance plateau inside it
  double w_clear = 300.0;
  double w_dyn = 20.0;
  int refine_iterations = 100;
  double check_dt = 0.02;  // dense validation sample step (s)

  void validate() const;  // throws ConfigError
};

struct GuidePlan {
  std::optional<BSplineCurve> curve;  // empty when no grid path exists
  bool feasible = false;              // dense clearance > inflation throughout
  double min_clearance = 0.0;         // over dense samples (0 when no curve)
  double length = 0.0;                // arc length of the planned curve (m)
  int expanded_nodes = 0;             // search effort diagnostic
};

// Shortest 26-connected voxel path whose every voxel keeps ESDF distance
// strictly above `clearance`. Returns the exact start and goal joined by
// intermediate voxel centers; empty vector when no such path exists.
// Throws InputError if an endpoint is outside the grid or too close to
// obstacles.
std::vector<Eigen::Vector3d> searchPath(const EsdfGrid& esdf, const Eigen::Vector3d& start,
                                        const Eigen::Vector3d& goal, double clearance,
                                        int* expanded_nodes = nullptr);

// Time-parameterizes a waypoint polyline with a trapezoidal (or triangular)
// speed profile capped at v_max/a_max and fits a clamped cubic B-spline with
// rest boundary conditions. A zero-length path becomes a hover of
// cfg.hover_duration.
BSplineCurve parameterizePath(const std::vector<Eigen::Vector3d>& path, const GuideConfig& cfg);

// Gradient refinement of the interior control points: acceleration
// smoothness, an ESDF clearance hinge at inflation + refine_margin (applied
// at control points and control-polygon edge midpoints), and soft
// speed/acceleration limit penalties. Endpoint control points stay put. If
// the optimized curve fails a dense clearance check that the input passes,
// the input is returned instead (best feasible iterate wins).
BSplineCurve refineGuide(const BSplineCurve& traj, const EsdfGrid& esdf, const GuideConfig& cfg);

// Smallest sampled ESDF distance along the curve at step dt.
double minClearance(const BSplineCurve& curve, const EsdfGrid& esdf, double dt);

// search + parameterize + refine + dense validation.
GuidePlan planGuide(const EsdfGrid& esdf, const Eigen::Vector3d& start,
                    const Eigen::Vector3d& goal, const GuideConfig& cfg);

// Arc length of the curve by dense uniform sampling.
double curveLength(const BSplineCurve& curve, int samples = 2000);

}  // namespace ringo
