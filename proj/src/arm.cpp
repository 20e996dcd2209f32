#include "ringo/arm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ringo/errors.hpp"

namespace ringo {

namespace {
constexpr double kReachTol = 1e-9;

void checkLimit(double value, const std::array<double, 2>& lim, const char* name) {
  if (value < lim[0] - 1e-12 || value > lim[1] + 1e-12) {
    std::ostringstream os;
    os << name << " = " << value << " outside limits [" << lim[0] << ", " << lim[1] << "]";
    throw JointLimitError(os.str());
  }
}
}  // namespace

void ArmGeometry::validate() const {
  if (!(l1 > 0.0) || !(l2 > 0.0)) throw ConfigError("arm link lengths must be positive");
  if (theta1_limits[0] >= theta1_limits[1] || theta2_limits[0] >= theta2_limits[1])
    throw ConfigError("arm joint limits must be ordered");
}

void WorkspaceParams::validate() const {
  if (!(r_max > 0.0) || !(r_min > 0.0) || !(r_min < r_max))
    throw ConfigError("workspace radii must satisfy 0 < r_min < r_max");
  if (!(r_d > 0.0) || !(r_d < r_max))
    throw ConfigError("workspace r_d must lie strictly between 0 and r_max");
  if (!(z_d > r_min) || !(z_d < r_max))
    throw ConfigError("workspace z_d must lie strictly between r_min and r_max");
  if (!(f_d > 0.0) || !(k > 0.0)) throw ConfigError("workspace f_d and k must be positive");
  if (h_o < 0.0 || h_l < 0.0) throw ConfigError("workspace gains must be non-negative");
}

double wrapAngle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

Eigen::Vector3d forwardKinematics(const ArmGeometry& geom, const GeneralizedJoint& joints) {
  checkLimit(joints.theta1, geom.theta1_limits, "theta1");
  checkLimit(joints.theta2, geom.theta2_limits, "theta2");
  // Planar chain in the vertical plane selected by psi; angles measured
  // from straight down, so theta1 = theta2 = 0 points the arm at -z.
  const double radial = geom.l1 * std::sin(joints.theta1) +
                        geom.l2 * std::sin(joints.theta1 + joints.theta2);
  const double z = -geom.l1 * std::cos(joints.theta1) -
                   geom.l2 * std::cos(joints.theta1 + joints.theta2);
  const double c = std::cos(joints.psi), s = std::sin(joints.psi);
  return Eigen::Vector3d(c * radial, s * radial, z) + geom.mount_offset;
}

GeneralizedJoint inverseKinematicsBranch(const ArmGeometry& geom, const Eigen::Vector3d& target,
                                         ElbowBranch branch) {
  const Eigen::Vector3d v = target - geom.mount_offset;
  const double r = v.norm();
  if (r > geom.maxReach() + kReachTol || r < geom.minReach() - kReachTol) {
    std::ostringstream os;
    os << "target at range " << r << " outside reach annulus [" << geom.minReach() << ", "
       << geom.maxReach() << "]";
    throw ReachabilityError(os.str());
  }

  const double radial = std::hypot(v.x(), v.y());
  GeneralizedJoint j;
  j.psi = (radial > 0.0) ? std::atan2(v.y(), v.x()) : 0.0;

  double cos_t2 = (r * r - geom.l1 * geom.l1 - geom.l2 * geom.l2) / (2.0 * geom.l1 * geom.l2);
  cos_t2 = std::clamp(cos_t2, -1.0, 1.0);
  const double t2 = std::acos(cos_t2);
  j.theta2 = branch == ElbowBranch::Up ? t2 : -t2;
  // Planar solve in (radial, -z) coordinates measured from straight down.
  const double phi = std::atan2(radial, -v.z());
  j.theta1 = phi - std::atan2(geom.l2 * std::sin(j.theta2),
                              geom.l1 + geom.l2 * std::cos(j.theta2));

  checkLimit(j.theta1, geom.theta1_limits, "theta1");
  checkLimit(j.theta2, geom.theta2_limits, "theta2");
  return j;
}

GeneralizedJoint inverseKinematics(const ArmGeometry& geom, const Eigen::Vector3d& target,
                                   ElbowBranch preferred, ElbowBranch* used) {
  const ElbowBranch other = preferred == ElbowBranch::Up ? ElbowBranch::Down : ElbowBranch::Up;
  try {
    const GeneralizedJoint j = inverseKinematicsBranch(geom, target, preferred);
    if (used) *used = preferred;
    return j;
  } catch (const JointLimitError&) {
    const GeneralizedJoint j = inverseKinematicsBranch(geom, target, other);
    if (used) *used = other;
    return j;
  }
}

bool workspaceContains(const WorkspaceParams& ws, const Eigen::Vector3d& p, double margin) {
  return p.norm() <= ws.r_max - margin && p.z() <= -ws.r_min - margin &&
         p.z() >= -ws.r_max + margin;
}

double workspaceViolation(const WorkspaceParams& ws, const Eigen::Vector3d& p) {
  const double sphere = p.norm() - ws.r_max;
  const double above = p.z() - (-ws.r_min);
  const double below = (-ws.r_max) - p.z();
  return std::max({0.0, sphere, above, below});
}

}  // namespace ringo
