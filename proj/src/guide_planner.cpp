#include "ringo/guide_planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "ringo/errors.hpp"
#include "ringo/lbfgs.hpp"

namespace ringo {

void GuideConfig::validate() const {
  if (inflation < 0) throw ConfigError("inflation must be >= 0");
  if (v_max <= 0 || a_max <= 0) throw ConfigError("v_max and a_max must be positive");
  if (span_dt <= 0) throw ConfigError("span_dt must be positive");
  if (min_spans < 5) throw ConfigError("min_spans must be at least 5");
  if (hover_duration <= 0) throw ConfigError("hover_duration must be positive");
  if (refine_margin < 0) throw ConfigError("refine_margin must be >= 0");
  if (w_smooth < 0 || w_clear < 0 || w_dyn < 0) throw ConfigError("weights must be >= 0");
  if (refine_iterations < 0) throw ConfigError("refine_iterations must be >= 0");
  if (check_dt <= 0) throw ConfigError("check_dt must be positive");
}

namespace {

struct QueueEntry {
  double f;
  double g;
  std::size_t id;
  bool operator>(const QueueEntry& o) const {
    if (f != o.f) return f > o.f;
    return id > o.id;  // deterministic tie-break
  }
};

}  // namespace

std::vector<Eigen::Vector3d> searchPath(const EsdfGrid& esdf, const Eigen::Vector3d& start,
                                        const Eigen::Vector3d& goal, double clearance,
                                        int* expanded_nodes) {
  if (expanded_nodes) *expanded_nodes = 0;
  if (!esdf.contains(start)) throw InputError("path start lies outside the map");
  if (!esdf.contains(goal)) throw InputError("path goal lies outside the map");
  if (!(esdf.query(start).distance > clearance))
    throw InputError("path start violates the required clearance");
  if (!(esdf.query(goal).distance > clearance))
    throw InputError("path goal violates the required clearance");

  const int nx = esdf.nx(), ny = esdf.ny(), nz = esdf.nz();
  const double res = esdf.resolution();
  const Eigen::Vector3i sv = esdf.voxelOf(start);
  const Eigen::Vector3i gv = esdf.voxelOf(goal);
  auto id_of = [&](const Eigen::Vector3i& v) {
    return static_cast<std::size_t>(v.x()) +
           static_cast<std::size_t>(nx) *
               (static_cast<std::size_t>(v.y()) +
                static_cast<std::size_t>(ny) * static_cast<std::size_t>(v.z()));
  };
  const std::size_t start_id = id_of(sv), goal_id = id_of(gv);

  if (start_id == goal_id) return {start, goal};

  const std::size_t n_vox = static_cast<std::size_t>(nx) * ny * nz;
  // endpoint voxels are admitted on the strength of the point-level check
  // above even if their center sits closer to an obstacle
  auto admissible = [&](int i, int j, int k, std::size_t id) {
    if (id == start_id || id == goal_id) return true;
    return esdf.distanceAt(i, j, k) > clearance;
  };

  std::vector<double> g_val(n_vox, std::numeric_limits<double>::infinity());
  std::vector<std::int32_t> parent(n_vox, -1);
  const Eigen::Vector3d goal_center = esdf.voxelCenter(gv.x(), gv.y(), gv.z());

  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<QueueEntry>> open;
  g_val[start_id] = 0.0;
  open.push({(esdf.voxelCenter(sv.x(), sv.y(), sv.z()) - goal_center).norm(), 0.0, start_id});

  bool found = false;
  while (!open.empty()) {
    const QueueEntry top = open.top();
    open.pop();
    if (top.g > g_val[top.id]) continue;  // stale entry
    if (top.id == goal_id) {
      found = true;
      break;
    }
    if (expanded_nodes) ++(*expanded_nodes);

    const int k = static_cast<int>(top.id / (static_cast<std::size_t>(nx) * ny));
    const int j = static_cast<int>((top.id / nx) % static_cast<std::size_t>(ny));
    const int i = static_cast<int>(top.id % static_cast<std::size_t>(nx));
    for (int dk = -1; dk <= 1; ++dk) {
      for (int dj = -1; dj <= 1; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0 && dk == 0) continue;
          const int ni = i + di, nj = j + dj, nk = k + dk;
          if (!esdf.inBounds(ni, nj, nk)) continue;
          const std::size_t nid = id_of({ni, nj, nk});
          if (!admissible(ni, nj, nk, nid)) continue;
          const double step = res * std::sqrt(double(di * di + dj * dj + dk * dk));
          const double cand = top.g + step;
          if (cand < g_val[nid]) {
            g_val[nid] = cand;
            parent[nid] = static_cast<std::int32_t>(top.id);
            const double h = (esdf.voxelCenter(ni, nj, nk) - goal_center).norm();
            open.push({cand + h, cand, nid});
          }
        }
      }
    }
  }
  if (!found) return {};

  std::vector<Eigen::Vector3d> rev;
  std::size_t cur = goal_id;
  while (cur != start_id) {
    const int ck = static_cast<int>(cur / (static_cast<std::size_t>(nx) * ny));
    const int cj = static_cast<int>((cur / nx) % static_cast<std::size_t>(ny));
    const int ci = static_cast<int>(cur % static_cast<std::size_t>(nx));
    rev.push_back(esdf.voxelCenter(ci, cj, ck));
    cur = static_cast<std::size_t>(parent[cur]);
  }
  std::vector<Eigen::Vector3d> path;
  path.push_back(start);
  for (auto it = rev.rbegin(); it != rev.rend(); ++it) path.push_back(*it);
  path.push_back(goal);
  // drop duplicates the endpoint insertion may have created
  std::vector<Eigen::Vector3d> out;
  for (const auto& p : path) {
    if (out.empty() || (p - out.back()).norm() > 1e-12) out.push_back(p);
  }
  return out;
}

namespace {

// distance covered at time t under a trapezoidal / triangular speed profile
struct SpeedProfile {
  double total_length = 0.0;
  double duration = 0.0;
  double t_acc = 0.0;   // ramp time
  double v_peak = 0.0;  // cruise (or apex) speed
  double a = 0.0;

  static SpeedProfile plan(double length, double v_max, double a_max) {
    SpeedProfile p;
    p.total_length = length;
    p.a = a_max;
    if (length >= v_max * v_max / a_max) {
      p.v_peak = v_max;
      p.t_acc = v_max / a_max;
      p.duration = length / v_max + v_max / a_max;
    } else {
      p.v_peak = std::sqrt(length * a_max);
      p.t_acc = p.v_peak / a_max;
      p.duration = 2.0 * p.t_acc;
    }
    return p;
  }

  double position(double t) const {
    t = std::clamp(t, 0.0, duration);
    if (t <= t_acc) return 0.5 * a * t * t;
    if (t >= duration - t_acc) {
      const double r = duration - t;
      return total_length - 0.5 * a * r * r;
    }
    return 0.5 * a * t_acc * t_acc + v_peak * (t - t_acc);
  }
};

Eigen::Vector3d pointAtArcLength(const std::vector<Eigen::Vector3d>& path,
                                 const std::vector<double>& cum, double s) {
  s = std::clamp(s, 0.0, cum.back());
  const auto it = std::upper_bound(cum.begin(), cum.end(), s);
  std::size_t seg = static_cast<std::size_t>(std::distance(cum.begin(), it));
  if (seg == 0) seg = 1;
  if (seg >= cum.size()) seg = cum.size() - 1;
  const double seg_len = cum[seg] - cum[seg - 1];
  const double u = seg_len > 0 ? (s - cum[seg - 1]) / seg_len : 0.0;
  return path[seg - 1] + u * (path[seg] - path[seg - 1]);
}

}  // namespace

BSplineCurve parameterizePath(const std::vector<Eigen::Vector3d>& path, const GuideConfig& cfg) {
  if (path.empty()) throw InputError("cannot parameterize an empty path");

  std::vector<double> cum{0.0};
  for (std::size_t i = 1; i < path.size(); ++i)
    cum.push_back(cum.back() + (path[i] - path[i - 1]).norm());
  const double length = cum.back();

  if (length < 1e-9) {  // hover in place
    auto kn = KnotVector::clampedUniform(0.0, cfg.hover_duration, cfg.min_spans, 3);
    std::vector<Eigen::Vector3d> ctrl(static_cast<std::size_t>(cfg.min_spans + 3), path.front());
    return BSplineCurve(3, std::move(ctrl), kn);
  }

  const SpeedProfile prof = SpeedProfile::plan(length, cfg.v_max, cfg.a_max);
  const int num_spans =
      std::max(cfg.min_spans, static_cast<int>(std::ceil(prof.duration / cfg.span_dt)));
  auto kn = KnotVector::clampedUniform(0.0, prof.duration, num_spans, 3);

  const int n_samples = 8 * num_spans + 1;
  std::vector<std::pair<double, Eigen::Vector3d>> samples;
  samples.reserve(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    const double t = prof.duration * i / (n_samples - 1);
    samples.emplace_back(t, pointAtArcLength(path, cum, prof.position(t)));
  }

  const std::vector<Eigen::Vector3d> head(3, path.front());
  const std::vector<Eigen::Vector3d> tail(3, path.back());
  return fitWithPinnedEnds(samples, kn, 3, head, tail).curve;
}

BSplineCurve refineGuide(const BSplineCurve& traj, const EsdfGrid& esdf, const GuideConfig& cfg) {
  if (traj.degree() != 3) throw ConfigError("guide refinement expects a cubic curve");
  const int n_ctrl = traj.numControlPoints();
  const int n_last = n_ctrl - 1;
  const int free_lo = 3, free_hi = n_last - 3;
  if (free_lo > free_hi || cfg.refine_iterations == 0) return traj;

  const KnotVector& kn = *traj.knots();
  std::vector<AccelStencil> stencils;
  for (int i = 0; i + 2 <= n_last; ++i) stencils.push_back(accelStencil(kn, 3, i));

  const double clear_target = cfg.inflation + cfg.refine_margin;
  std::vector<Eigen::Vector3d> pts = traj.controlPoints();
  const int n_free = free_hi - free_lo + 1;

  // fixed-time clearance samples; the step keeps the worst inter-sample dip
  // (at most v_max * step / 2 by the 1-Lipschitz distance field) well inside
  // the refine margin
  struct CurveSample {
    double w[4];
    int first;
  };
  std::vector<CurveSample> curve_samples;
  {
    const double step = std::min(0.025, 0.5 * cfg.refine_margin / cfg.v_max);
    const int n_samp = std::max(2, static_cast<int>(std::ceil(traj.duration() / step)) + 1);
    for (int m = 0; m < n_samp; ++m) {
      const double t =
          traj.domainStart() + traj.duration() * m / static_cast<double>(n_samp - 1);
      const int span = detail::findSpan(kn, 3, n_ctrl, t);
      CurveSample cs;
      cs.first = span - 3;
      detail::basisFunctions(kn, 3, span, t, cs.w);
      curve_samples.push_back(cs);
    }
  }

  // clamp-aware distance: points pushed off the map read as touching, with
  // the gradient pulling back toward the map volume
  auto sample_dist = [&](const Eigen::Vector3d& p, Eigen::Vector3d* grad_out) {
    const EsdfQuery q = esdf.query(p);
    if (!q.clamped) {
      if (grad_out) *grad_out = q.gradient;
      return q.distance;
    }
    if (grad_out) {
      const Eigen::Vector3d lo = esdf.origin();
      const Eigen::Vector3d hi =
          esdf.origin() + esdf.resolution() * Eigen::Vector3d(esdf.nx(), esdf.ny(), esdf.nz());
      Eigen::Vector3d inward = Eigen::Vector3d::Zero();
      for (int a = 0; a < 3; ++a) {
        if (p[a] < lo[a]) inward[a] = 1.0;
        if (p[a] > hi[a]) inward[a] = -1.0;
      }
      const double n = inward.norm();
      *grad_out = n > 0 ? Eigen::Vector3d(inward / n) : Eigen::Vector3d::Zero();
    }
    return 0.0;
  };

  auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    for (int i = 0; i < n_free; ++i)
      pts[static_cast<std::size_t>(free_lo + i)] = x.segment<3>(3 * i);
    grad.setZero(x.size());
    auto add_grad = [&](int ctrl_idx, const Eigen::Vector3d& g) {
      if (ctrl_idx < free_lo || ctrl_idx > free_hi) return;
      grad.segment<3>(3 * (ctrl_idx - free_lo)) += g;
    };
    double f = 0.0;

    for (std::size_t i = 0; i < stencils.size(); ++i) {
      const AccelStencil& m = stencils[i];
      const int b = static_cast<int>(i);
      const Eigen::Vector3d A = m.m0 * pts[i] + m.m1 * pts[i + 1] + m.m2 * pts[i + 2];
      f += cfg.w_smooth * A.squaredNorm();
      add_grad(b, cfg.w_smooth * 2.0 * m.m0 * A);
      add_grad(b + 1, cfg.w_smooth * 2.0 * m.m1 * A);
      add_grad(b + 2, cfg.w_smooth * 2.0 * m.m2 * A);
      const double an = A.norm();
      if (an > cfg.a_max) {
        const Eigen::Vector3d dir = A / an;
        const double excess = an - cfg.a_max;
        f += cfg.w_dyn * excess * excess;
        add_grad(b, cfg.w_dyn * 2.0 * excess * m.m0 * dir);
        add_grad(b + 1, cfg.w_dyn * 2.0 * excess * m.m1 * dir);
        add_grad(b + 2, cfg.w_dyn * 2.0 * excess * m.m2 * dir);
      }
    }

    for (int i = 0; i + 1 <= n_last; ++i) {
      const double span = kn[i + 4] - kn[i + 1];
      if (span <= 0) continue;
      const Eigen::Vector3d V =
          3.0 / span * (pts[static_cast<std::size_t>(i + 1)] - pts[static_cast<std::size_t>(i)]);
      const double vn = V.norm();
      if (vn > cfg.v_max) {
        const Eigen::Vector3d dir = V / vn;
        const double excess = vn - cfg.v_max;
        f += cfg.w_dyn * excess * excess;
        add_grad(i + 1, cfg.w_dyn * 2.0 * excess * (3.0 / span) * dir);
        add_grad(i, cfg.w_dyn * -2.0 * excess * (3.0 / span) * dir);
      }
    }

    // clearance is enforced on the curve itself, not the control polygon:
    // dense samples catch the sag a span can make between clear control
    // points, and each sample's gradient flows to the four active points
    // through its basis weights
    for (const CurveSample& cs : curve_samples) {
      Eigen::Vector3d p = Eigen::Vector3d::Zero();
      for (int r = 0; r < 4; ++r) p += cs.w[r] * pts[static_cast<std::size_t>(cs.first + r)];
      Eigen::Vector3d dg;
      const double d = sample_dist(p, &dg);
      if (d < clear_target) {
        const double gap = d - clear_target;
        f += cfg.w_clear * gap * gap;
        for (int r = 0; r < 4; ++r) add_grad(cs.first + r, cfg.w_clear * 2.0 * gap * cs.w[r] * dg);
      }
    }
    return f;
  };

  Eigen::VectorXd x0(3 * n_free);
  for (int i = 0; i < n_free; ++i)
    x0.segment<3>(3 * i) = pts[static_cast<std::size_t>(free_lo + i)];

  LbfgsParams lp;
  lp.max_iterations = cfg.refine_iterations;
  lp.g_tol = 1e-6;
  lp.f_tol = 1e-10;
  const LbfgsResult res = minimize(objective, std::move(x0), lp);
  std::vector<Eigen::Vector3d> out = traj.controlPoints();
  for (int i = 0; i < n_free; ++i)
    out[static_cast<std::size_t>(free_lo + i)] = res.x.segment<3>(3 * i);
  BSplineCurve refined(3, std::move(out), traj.knots());

  // never hand back something worse than the input: if optimization lost
  // clearance the input had, keep the input
  const double after = minClearance(refined, esdf, cfg.check_dt);
  if (after > cfg.inflation) return refined;
  const double before = minClearance(traj, esdf, cfg.check_dt);
  return after >= before ? refined : traj;
}

double minClearance(const BSplineCurve& curve, const EsdfGrid& esdf, double dt) {
  const int n = std::max(2, static_cast<int>(std::ceil(curve.duration() / dt)) + 1);
  double min_d = std::numeric_limits<double>::infinity();
  for (const auto& [t, p] : curve.sampleUniform(n))
    min_d = std::min(min_d, esdf.query(p).distance);
  return min_d;
}

double curveLength(const BSplineCurve& curve, int samples) {
  const auto pts = curve.sampleUniform(samples);
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += (pts[i].second - pts[i - 1].second).norm();
  return len;
}

GuidePlan planGuide(const EsdfGrid& esdf, const Eigen::Vector3d& start,
                    const Eigen::Vector3d& goal, const GuideConfig& cfg) {
  cfg.validate();
  GuidePlan plan;
  const std::vector<Eigen::Vector3d> path =
      searchPath(esdf, start, goal, cfg.inflation, &plan.expanded_nodes);
  if (path.empty()) return plan;  // no route at this clearance

  BSplineCurve curve = refineGuide(parameterizePath(path, cfg), esdf, cfg);

  const double min_clear = minClearance(curve, esdf, cfg.check_dt);
  plan.curve = std::move(curve);
  plan.min_clearance = min_clear;
  plan.feasible = min_clear > cfg.inflation;
  plan.length = curveLength(*plan.curve);
  return plan;
}

}  // namespace ringo
