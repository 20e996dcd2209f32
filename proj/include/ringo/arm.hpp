#pragma once

#include <Eigen/Core>
#include <array>

namespace ringo {

// Joint state of the delta-arm abstraction: multi-rotor yaw plus the two
// pitch joints of the planar arm. theta1/theta2 are measured from the
// straight-down configuration; psi is normalized to (-pi, pi].
struct GeneralizedJoint {
  double psi = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
};

struct ArmGeometry {
  double l1 = 0.275;
  double l2 = 0.275;
  Eigen::Vector3d mount_offset = Eigen::Vector3d::Zero();  // body center -> joint-1 axis
  std::array<double, 2> theta1_limits = {-2.8, 2.8};
  std::array<double, 2> theta2_limits = {-3.0, 3.0};

  double maxReach() const { return l1 + l2; }
  double minReach() const { return std::abs(l1 - l2); }
  void validate() const;
};

// Convex end-effector workspace relative to the body center: the reach
// sphere of radius r_max intersected with the slab -r_max <= z <= -r_min.
// r_d / z_d / f_d / k / h_o / h_l shape the containment cost built on it.
struct WorkspaceParams {
  double r_max = 0.54;
  double r_min = 0.15;
  double r_d = 0.2;   // radial cost peak, 0 < r_d < r_max
  double z_d = 0.25;  // vertical cost peak depth, r_min < z_d < r_max
  double f_d = 1.0;   // peak penalty value
  double k = 10.0;    // soft-max sharpness
  double h_o = 1.0;   // radial term gain
  double h_l = 1.0;   // vertical term gain
  void validate() const;
};

enum class ElbowBranch { Up, Down };

double wrapAngle(double a);  // into (-pi, pi]

// End-effector position relative to the body center (frame V): yaw rotation
// applied to the planar two-link chain hanging in the vertical plane, plus
// the mount offset. Throws JointLimitError when a theta violates its limits.
Eigen::Vector3d forwardKinematics(const ArmGeometry& geom, const GeneralizedJoint& joints);

// Joints reaching the target (relative to body center). Throws
// ReachabilityError outside the annulus of reach and JointLimitError when
// the requested branch violates limits.
GeneralizedJoint inverseKinematicsBranch(const ArmGeometry& geom, const Eigen::Vector3d& target,
                                         ElbowBranch branch);

// Tries `preferred` first, falls back to the other branch; the branch that
// succeeded is written to *used when non-null.
GeneralizedJoint inverseKinematics(const ArmGeometry& geom, const Eigen::Vector3d& target,
                                   ElbowBranch preferred = ElbowBranch::Up,
                                   ElbowBranch* used = nullptr);

// Membership in the workspace shrunk inward by margin (negative margin
// grows the set; used to tolerate round-off in verification).
bool workspaceContains(const WorkspaceParams& ws, const Eigen::Vector3d& p, double margin = 0.0);

// How far p sticks out of the workspace (0 inside). Max of the sphere and
// slab violations in meters.
double workspaceViolation(const WorkspaceParams& ws, const Eigen::Vector3d& p);

}  // namespace ringo
