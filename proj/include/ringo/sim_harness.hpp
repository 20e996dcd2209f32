#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ringo/ee_planner.hpp"
#include "ringo/guide_planner.hpp"
#include "ringo/scenario.hpp"

namespace ringo {

// Body-path clearance radius a mode plans with. Proposed keeps the arm
// motion inside the body-relative workspace, so the body only needs its own
// clearance. Baseline treats the vehicle plus fully stretched arm as one
// ball, so the body path must clear the mount offset plus full reach plus
// the end-effector clearance whenever that is larger.
double modeInflation(const Scenario& sc, PlanMode mode);

struct RunMetrics {
  bool success = false;
  std::string failure_reason;  // empty on success
  double length = 0.0;         // m flown (or planned when the map is known)
  double travel_time = 0.0;    // s of trajectory execution
  double comp_multi_ms = 0.0;  // mean body-stage planning time per event
  double comp_arm_ms = 0.0;    // mean arm-stage time per event (proposed only)
  double comp_total_ms = 0.0;  // mean full planning event, >= both stages
  int replans = 0;             // planning events beyond the initial one
};

struct ExecSample {
  double t = 0.0;  // playback time since launch (s)
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
};

// Everything one scenario run produces. Curves and joint samples come from
// the last planning event; in known-map runs that is the only one.
struct RunResult {
  RunMetrics metrics;
  std::optional<BSplineCurve> guide;     // body trajectory
  std::optional<BSplineCurve> ee_curve;  // absolute end-effector trajectory
  std::optional<BSplineCurve> relative;  // ee minus body, shared knots
  std::vector<JointSample> joints;       // sampled joint commands
  std::vector<double> cost_trace;        // arm optimizer cost per iteration
  std::vector<ExecSample> executed;      // body playback (reveal mode only)
  std::vector<double> multi_times_ms;    // one entry per planning event
  std::vector<double> arm_times_ms;      // one per arm planning event
};

// Plans (and in reveal mode flies) one scenario under the given mode.
//
// reveal_radius == 0: the map is fully known. One planning event: body
// guide, then in proposed mode the arm stage on top of it.
//
// reveal_radius > 0: the run starts with an empty occupancy grid and flies
// kinematically along the current plan, copying true-map voxels into the
// known grid whenever they come within reveal_radius of the body. Unknown
// space counts as free. When newly revealed voxels pinch the remainder of
// the active trajectory below the mode's clearance radius, the vehicle
// stops and replans from its current position (plans are rest-to-rest, so
// this is kinematically consistent); in proposed mode each replan re-runs
// the arm stage with the nominal relative endpoints, the arm having settled
// back to its start pose during the stop. Stage times are averaged over all
// planning events.
//
// A planning event whose grid path exists but whose refined curve misses
// the clearance gate is retried up to twice at half the previous speed cap;
// slower flight eases the acceleration pressure that pins tight detours
// against the limit. Planning infeasibility that survives the retries (no
// path under the clearance radius, endpoints too close to obstacles, arm
// target unreachable) is reported as a failed run with a reason, not an
// exception. Scenario-level defects (unsatisfiable forest spec, bad config)
// still throw.
RunResult runScenario(const Scenario& sc, PlanMode mode);

struct CompareRow {
  std::string scenario;
  PlanMode mode = PlanMode::Proposed;
  RunMetrics metrics;
};

struct CompareReport {
  std::vector<CompareRow> rows;      // proposed then baseline per scenario
  std::vector<double> arm_times_ms;  // pooled over all proposed planning events
  bool all_success = true;
};

// Runs every scenario under both modes. threads > 1 distributes whole runs
// over that many workers (each run stays single-threaded, so per-stage
// timings remain comparable); 0 or 1 runs serially.
CompareReport compareScenarios(const std::vector<Scenario>& scenarios, int threads = 1);

// scenario,mode,success,length_m,travel_time_s,comp_multi_ms,comp_arm_ms,
// comp_total_ms,replans,failure_reason. Arm time is empty for baseline rows.
void writeMetricsCsv(std::ostream& os, const CompareReport& report);

// t,x,y,z,xe_x,xe_y,xe_z,psi,theta1,theta2 at the joint sample instants.
// Without joint samples (baseline) the body columns are sampled at the
// joint rate and the arm columns stay empty.
void writeTrajectoryCsv(std::ostream& os, const RunResult& run, double rate_hz = 100.0);

// t,x,y,z of the playback samples.
void writeExecutedCsv(std::ostream& os, const RunResult& run);

// iteration,cost rows of an optimizer trace.
void writeCostTraceCsv(std::ostream& os, const std::vector<double>& trace);

// One named column of samples (e.g. arm-stage milliseconds).
void writeSamplesCsv(std::ostream& os, const std::string& column, const std::vector<double>& v);

}  // namespace ringo
