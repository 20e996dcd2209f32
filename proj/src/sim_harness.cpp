#include "ringo/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "ringo/costs.hpp"
#include "ringo/errors.hpp"

namespace ringo {

double modeInflation(const Scenario& sc, PlanMode mode) {
  if (mode == PlanMode::Proposed) return sc.body_clearance;
  const double stretched = sc.arm.mount_offset.norm() + sc.arm.maxReach() + sc.ee_clearance;
  return std::max(sc.body_clearance, stretched);
}

namespace {

using Clock = std::chrono::steady_clock;

double msSince(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// One planning event: body guide, then the arm stage when requested. Fills
// the per-event time vectors and the last-plan fields of `out`.
struct EventOutcome {
  bool ok = false;
  std::string reason;
};

EventOutcome planEvent(const Scenario& sc, PlanMode mode, const GuideConfig& gcfg,
                       const std::shared_ptr<const EsdfGrid>& esdf, const Eigen::Vector3d& from,
                       RunResult& out) {
  EventOutcome ev;
  const auto t_multi = Clock::now();
  GuidePlan plan = planGuide(*esdf, from, sc.goal, gcfg);
  // A grid path can exist while the refined curve still misses the
  // clearance gate: through a tight detour at full speed the acceleration
  // hinge pins the refine equilibrium near the limit. Easing the speed cap
  // relaxes that pressure quadratically, so retry slower before giving up.
  GuideConfig slow = gcfg;
  for (int retry = 0; retry < 2 && !plan.feasible && plan.curve; ++retry) {
    slow.v_max *= 0.5;
    plan = planGuide(*esdf, from, sc.goal, slow);
  }
  const double multi_ms = msSince(t_multi);
  out.multi_times_ms.push_back(multi_ms);
  double total_ms = multi_ms;

  if (!plan.feasible) {
    std::ostringstream os;
    if (plan.curve)
      os << "no body trajectory clears " << gcfg.inflation << " m (closest approach "
         << plan.min_clearance << " m)";
    else
      os << "no body route clears " << gcfg.inflation << " m";
    ev.reason = os.str();
    return ev;
  }
  out.guide = plan.curve;

  if (mode == PlanMode::Proposed) {
    const auto t_arm = Clock::now();
    const CostContext ctx(*plan.curve, sc.workspace, sc.weights, esdf, sc.obstacle_threshold);
    const EePlanResult ee = planEndEffector(ctx, sc.arm, sc.eeRequest());
    total_ms += msSince(t_arm);
    out.arm_times_ms.push_back(ee.diagnostics.wall_time_ms);
    out.ee_curve = ee.ee_curve;
    out.relative = ee.relative_curve;
    out.joints = ee.joint_trajectory;
    out.cost_trace = ee.diagnostics.cost_trace;
    if (!ee.checks.workspace_ok || !ee.checks.collision_ok) {
      std::ostringstream os;
      os << "arm trajectory rejected:";
      if (!ee.checks.workspace_ok)
        os << " workspace violation " << ee.checks.max_workspace_violation << " m";
      if (!ee.checks.collision_ok)
        os << " end-effector clearance " << ee.checks.min_ee_distance << " m";
      ev.reason = os.str();
      return ev;
    }
  }
  out.metrics.comp_total_ms += total_ms;  // re-averaged by the caller
  ev.ok = true;
  return ev;
}

double meanOf(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void finalizeTimes(RunResult& out) {
  out.metrics.comp_multi_ms = meanOf(out.multi_times_ms);
  out.metrics.comp_arm_ms = meanOf(out.arm_times_ms);
  const int events = static_cast<int>(out.multi_times_ms.size());
  if (events > 0) out.metrics.comp_total_ms /= events;
  out.metrics.replans = std::max(0, events - 1);
}

// Copies true-map occupancy into the known grid around pos, collecting the
// centers of voxels that just switched to occupied.
void reveal(const OccupancyGrid& truth, OccupancyGrid& known, const Eigen::Vector3d& pos,
            double radius, std::vector<Eigen::Vector3d>& newly) {
  const Eigen::Vector3d r(radius, radius, radius);
  const Eigen::Vector3i lo = truth.voxelOf(pos - r);
  const Eigen::Vector3i hi = truth.voxelOf(pos + r);
  const double r2 = radius * radius;
  for (int k = std::max(0, lo.z()); k <= std::min(truth.nz() - 1, hi.z()); ++k)
    for (int j = std::max(0, lo.y()); j <= std::min(truth.ny() - 1, hi.y()); ++j)
      for (int i = std::max(0, lo.x()); i <= std::min(truth.nx() - 1, hi.x()); ++i) {
        if (!truth.occupied(i, j, k) || known.occupied(i, j, k)) continue;
        const Eigen::Vector3d c = truth.voxelCenter(i, j, k);
        if ((c - pos).squaredNorm() > r2) continue;
        known.setOccupied(i, j, k);
        newly.push_back(c);
      }
}

// True when any sample of the remaining trajectory comes within `inflation`
// of one of the newly revealed voxel centers. Previously known voxels were
// already cleared when the plan was made and on earlier reveals, so only
// the new batch can invalidate it.
bool remainderBlocked(const BSplineCurve& curve, double t_from, double dt,
                      const std::vector<Eigen::Vector3d>& newly, double inflation) {
  const double r2 = inflation * inflation;
  for (double t = t_from;; t += dt) {
    const double tc = std::min(t, curve.domainEnd());
    const Eigen::Vector3d p = curve.evaluate(tc);
    for (const auto& v : newly)
      if ((p - v).squaredNorm() <= r2) return true;
    if (tc >= curve.domainEnd()) return false;
  }
}

void knownMapRun(const Scenario& sc, PlanMode mode, const OccupancyGrid& truth,
                 const GuideConfig& gcfg, RunResult& out) {
  const auto esdf = std::make_shared<const EsdfGrid>(EsdfGrid::build(truth));
  const EventOutcome ev = planEvent(sc, mode, gcfg, esdf, sc.start, out);
  finalizeTimes(out);
  if (!ev.ok) {
    out.metrics.failure_reason = ev.reason;
    return;
  }
  out.metrics.success = true;
  out.metrics.length = curveLength(*out.guide);
  out.metrics.travel_time = out.guide->duration();
}

void revealRun(const Scenario& sc, PlanMode mode, const OccupancyGrid& truth,
               const GuideConfig& gcfg, RunResult& out) {
  OccupancyGrid known(truth.origin(), truth.resolution(), truth.nx(), truth.ny(), truth.nz());
  Eigen::Vector3d pos = sc.start;
  std::vector<Eigen::Vector3d> newly;
  reveal(truth, known, pos, sc.reveal_radius, newly);

  auto planFrom = [&](const Eigen::Vector3d& from) {
    const auto esdf = std::make_shared<const EsdfGrid>(EsdfGrid::build(known));
    return planEvent(sc, mode, gcfg, esdf, from, out);
  };

  double t_exec = 0.0;
  out.executed.push_back({t_exec, pos});
  EventOutcome ev = planFrom(pos);
  const double dt = gcfg.check_dt;
  // generous cap: a desk-scale scenario needing more replans than this is
  // oscillating, not exploring
  const int max_replans = 50;

  while (ev.ok) {
    const BSplineCurve curve = *out.guide;
    double t = curve.domainStart();
    bool replanned = false;
    while (t < curve.domainEnd() - 1e-9) {
      const double t_next = std::min(t + dt, curve.domainEnd());
      t_exec += t_next - t;
      t = t_next;
      pos = curve.evaluate(t);
      out.executed.push_back({t_exec, pos});
      newly.clear();
      reveal(truth, known, pos, sc.reveal_radius, newly);
      if (!newly.empty() && remainderBlocked(curve, t, dt, newly, gcfg.inflation)) {
        if (static_cast<int>(out.multi_times_ms.size()) > max_replans) {
          finalizeTimes(out);
          out.metrics.failure_reason = "replan limit exceeded";
          out.metrics.travel_time = t_exec;
          return;
        }
        ev = planFrom(pos);
        replanned = true;
        break;
      }
    }
    if (!replanned) break;
  }

  finalizeTimes(out);
  out.metrics.travel_time = t_exec;
  double length = 0.0;
  for (std::size_t i = 1; i < out.executed.size(); ++i)
    length += (out.executed[i].p - out.executed[i - 1].p).norm();
  out.metrics.length = length;

  if (!ev.ok) {
    std::ostringstream os;
    os << ev.reason << " (replanning at " << pos.x() << ", " << pos.y() << ", " << pos.z()
       << ")";
    out.metrics.failure_reason = os.str();
    return;
  }
  const double miss = (pos - sc.goal).norm();
  if (miss > sc.goal_tolerance) {
    std::ostringstream os;
    os << "stopped " << miss << " m from the goal";
    out.metrics.failure_reason = os.str();
    return;
  }
  out.metrics.success = true;
}

}  // namespace

RunResult runScenario(const Scenario& sc, PlanMode mode) {
  RunResult out;
  const OccupancyGrid truth = buildMap(sc.map, sc.seed, sc.start, sc.goal);
  GuideConfig gcfg = sc.guide;
  gcfg.inflation = modeInflation(sc, mode);
  try {
    if (sc.reveal_radius > 0.0)
      revealRun(sc, mode, truth, gcfg, out);
    else
      knownMapRun(sc, mode, truth, gcfg, out);
  } catch (const InputError& e) {
    out.metrics.success = false;
    out.metrics.failure_reason = e.what();
    finalizeTimes(out);
  } catch (const ReachabilityError& e) {
    out.metrics.success = false;
    out.metrics.failure_reason = e.what();
    finalizeTimes(out);
  }
  return out;
}

CompareReport compareScenarios(const std::vector<Scenario>& scenarios, int threads) {
  struct Job {
    const Scenario* sc;
    PlanMode mode;
  };
  std::vector<Job> jobs;
  for (const Scenario& sc : scenarios) {
    jobs.push_back({&sc, PlanMode::Proposed});
    jobs.push_back({&sc, PlanMode::Baseline});
  }
  std::vector<RunResult> results(jobs.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
      try {
        results[i] = runScenario(*jobs[i].sc, jobs[i].mode);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  const int n_workers = std::min<int>(std::max(threads, 1), static_cast<int>(jobs.size()));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  CompareReport report;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    report.rows.push_back({jobs[i].sc->name, jobs[i].mode, results[i].metrics});
    report.all_success = report.all_success && results[i].metrics.success;
    if (jobs[i].mode == PlanMode::Proposed)
      report.arm_times_ms.insert(report.arm_times_ms.end(), results[i].arm_times_ms.begin(),
                                 results[i].arm_times_ms.end());
  }
  return report;
}

namespace {

// RFC-4180 style: quote when the text holds a comma or quote.
std::string csvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  q += '"';
  return q;
}

}  // namespace

void writeMetricsCsv(std::ostream& os, const CompareReport& report) {
  os << "scenario,mode,success,length_m,travel_time_s,comp_multi_ms,comp_arm_ms,"
        "comp_total_ms,replans,failure_reason\n";
  for (const CompareRow& row : report.rows) {
    const RunMetrics& m = row.metrics;
    os << csvField(row.scenario) << ',' << modeName(row.mode) << ','
       << (m.success ? "true" : "false") << ',' << m.length << ',' << m.travel_time << ','
       << m.comp_multi_ms << ',';
    if (row.mode == PlanMode::Proposed) os << m.comp_arm_ms;
    os << ',' << m.comp_total_ms << ',' << m.replans << ',' << csvField(m.failure_reason)
       << '\n';
  }
}

void writeTrajectoryCsv(std::ostream& os, const RunResult& run, double rate_hz) {
  os << "t,x,y,z,xe_x,xe_y,xe_z,psi,theta1,theta2\n";
  if (!run.guide) return;
  const BSplineCurve& guide = *run.guide;
  if (!run.joints.empty() && run.ee_curve) {
    for (const JointSample& j : run.joints) {
      const Eigen::Vector3d x = guide.evaluate(j.t);
      const Eigen::Vector3d xe = run.ee_curve->evaluate(j.t);
      os << j.t << ',' << x.x() << ',' << x.y() << ',' << x.z() << ',' << xe.x() << ','
         << xe.y() << ',' << xe.z() << ',' << j.psi << ',' << j.theta1 << ',' << j.theta2
         << '\n';
    }
    return;
  }
  if (rate_hz <= 0.0) throw ConfigError("trajectory sample rate must be positive");
  const double t0 = guide.domainStart(), t1 = guide.domainEnd();
  for (double t = t0;; t += 1.0 / rate_hz) {
    const double tc = std::min(t, t1);
    const Eigen::Vector3d x = guide.evaluate(tc);
    os << tc << ',' << x.x() << ',' << x.y() << ',' << x.z() << ",,,,,,\n";
    if (tc >= t1) break;
  }
}

void writeExecutedCsv(std::ostream& os, const RunResult& run) {
  os << "t,x,y,z\n";
  for (const ExecSample& s : run.executed)
    os << s.t << ',' << s.p.x() << ',' << s.p.y() << ',' << s.p.z() << '\n';
}

void writeCostTraceCsv(std::ostream& os, const std::vector<double>& trace) {
  os << "iteration,cost\n";
  for (std::size_t i = 0; i < trace.size(); ++i) os << i << ',' << trace[i] << '\n';
}

void writeSamplesCsv(std::ostream& os, const std::string& column, const std::vector<double>& v) {
  os << csvField(column) << '\n';
  for (double x : v) os << x << '\n';
}

}  // namespace ringo
