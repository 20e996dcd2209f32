#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ringo/arm.hpp"
#include "ringo/costs.hpp"
#include "ringo/ee_planner.hpp"
#include "ringo/esdf.hpp"
#include "ringo/guide_planner.hpp"

namespace ringo {

// Axis-aligned solid box given by opposite corners (meters, world frame).
struct BoxObstacle {
  Eigen::Vector3d min, max;
};

// Vertical solid cylinder: circle in the xy plane extruded from z0 to z1.
struct CylinderObstacle {
  double x = 0, y = 0, radius = 0.2;
  double z0 = 0, z1 = 1;
};

// Solid torus around an axis-aligned centerline. axis selects which world
// axis the ring encircles: the tube of minor radius lies at major_radius
// from the center inside the plane normal to that axis.
struct RingObstacle {
  Eigen::Vector3d center{0, 0, 0};
  char axis = 'x';  // 'x', 'y' or 'z'
  double major_radius = 0.8;
  double minor_radius = 0.1;
};

// Randomly placed vertical columns. Columns keep a configured xy distance
// from the start and goal; placement that cannot satisfy the keep-out
// within the retry budget raises GenerationError.
struct ForestSpec {
  int count = 0;
  double radius_min = 0.05, radius_max = 0.15;
  double keep_out = 0.6;  // m around start/goal, center to column surface
  int max_retries_per_column = 200;
};

struct MapSpec {
  Eigen::Vector3d origin{0, 0, 0};
  double resolution = 0.1;
  int nx = 10, ny = 10, nz = 10;
  std::vector<BoxObstacle> boxes;
  std::vector<CylinderObstacle> cylinders;
  std::vector<RingObstacle> rings;
  std::optional<ForestSpec> forest;
};

enum class PlanMode { Proposed, Baseline };
const char* modeName(PlanMode mode);
PlanMode parseMode(const std::string& name);  // throws ConfigError

struct Scenario {
  std::string name = "unnamed";
  std::uint64_t seed = 1;
  MapSpec map;
  Eigen::Vector3d start{0, 0, 1};
  Eigen::Vector3d goal{1, 0, 1};
  Eigen::Vector3d xve_start{0, 0, -0.35};
  Eigen::Vector3d xve_goal{0, 0, -0.35};
  double body_clearance = 0.3;  // rho for the body path
  double ee_clearance = 0.1;    // rho for the end-effector path
  double reveal_radius = 0.0;   // m, 0 = map fully known up front
  double goal_tolerance = 0.1;  // m, playback success radius
  PlanMode mode = PlanMode::Proposed;
  GuideConfig guide;
  WorkspaceParams workspace;
  CostWeights weights;
  ArmGeometry arm;
  double obstacle_threshold = 0.25;  // d_thr of the clearance cost
  EePlanRequest ee;  // endpoint and clearance fields are overridden from
                     // the scenario-level values by eeRequest()
  EePlanRequest eeRequest() const;
  void validate() const;  // throws ConfigError
};

// A voxel is occupied when its center lies inside any primitive, which
// matches the analytic membership tests exactly and keeps the occupancy
// consistent with center-to-center distance queries. Forest placement draws
// from the seed deterministically.
OccupancyGrid buildMap(const MapSpec& spec, std::uint64_t seed, const Eigen::Vector3d& start,
                       const Eigen::Vector3d& goal);

bool insideBox(const BoxObstacle& b, const Eigen::Vector3d& p);
bool insideCylinder(const CylinderObstacle& c, const Eigen::Vector3d& p);
bool insideRing(const RingObstacle& r, const Eigen::Vector3d& p);

// Parses the documented JSON schema. Unknown or ill-typed fields raise
// ConfigError naming the offending field; missing fields keep defaults.
Scenario parseScenario(const std::string& json_text);
Scenario loadScenario(const std::string& path);

// List of scenario file paths for a comparison batch, one per line or a
// JSON array under "scenarios"; relative entries resolve against the list
// file's directory.
std::vector<std::string> loadScenarioList(const std::string& path);

}  // namespace ringo
