#include "ringo/checks.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>

#include "ringo/costs.hpp"
#include "ringo/esdf.hpp"
#include "ringo/rng.hpp"

namespace ringo {

namespace {

using Eigen::Vector3d;

BSplineCurve randomGuide(Rng& rng, int n_ctrl, double duration) {
  auto kn = KnotVector::clampedUniform(0.0, duration, n_ctrl - 3, 3);
  std::vector<Vector3d> x;
  Vector3d p(0, 0, 1.0);
  for (int i = 0; i < n_ctrl; ++i) {
    x.push_back(p);
    p += rng.uniformBox(Vector3d(0.1, -0.1, -0.05), Vector3d(0.4, 0.1, 0.05));
  }
  return BSplineCurve(3, std::move(x), kn);
}

// Relative offsets that keep the finite-difference stencil away from the
// penalty piece boundaries, where the function is only C1.
Vector3d safeOffset(Rng& rng, const WorkspaceParams& ws) {
  while (true) {
    const Vector3d e = rng.uniformBox(Vector3d(-0.45, -0.45, -0.5), Vector3d(0.45, 0.45, -0.05));
    const double r = e.norm();
    if (std::hypot(e.x(), e.y()) < 2e-2) continue;
    if (std::abs(r - ws.r_d) < 2e-3 || std::abs(r - ws.r_max) < 2e-3) continue;
    const double z = e.z();
    if (std::abs(z + ws.z_d) < 2e-3 || std::abs(z + ws.r_min) < 2e-3 ||
        std::abs(z + ws.r_max) < 2e-3)
      continue;
    return e;
  }
}

using TermFn = double (*)(const ControlPoints&, const CostContext&, ControlPoints*);

// Max per-component relative error between the analytic gradient and a
// central difference over the free control points. `flip_one` negates the
// first free component of the analytic gradient first.
double gradientWorst(TermFn fn, const ControlPoints& q0, const CostContext& ctx, bool flip_one) {
  ControlPoints grad;
  fn(q0, ctx, &grad);
  if (flip_one) grad[static_cast<std::size_t>(ctx.freeLo())].x() *= -1.0;
  double worst = 0.0;
  const double h = 1e-6;
  ControlPoints q = q0;
  for (int i = ctx.freeLo(); i <= ctx.freeHi(); ++i) {
    for (int a = 0; a < 3; ++a) {
      const double saved = q[static_cast<std::size_t>(i)][a];
      q[static_cast<std::size_t>(i)][a] = saved + h;
      const double fp = fn(q, ctx, nullptr);
      q[static_cast<std::size_t>(i)][a] = saved - h;
      const double fm = fn(q, ctx, nullptr);
      q[static_cast<std::size_t>(i)][a] = saved;
      const double fd = (fp - fm) / (2 * h);
      const double an = grad[static_cast<std::size_t>(i)][a];
      worst = std::max(worst, std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)}));
    }
  }
  return worst;
}

// Distance from p to the convex hull of pts by enumerating every face and
// taking the best feasible equality-constrained least squares solution.
double hullDistance(const std::vector<Vector3d>& pts, const Vector3d& p) {
  const int n = static_cast<int>(pts.size());
  double best = std::numeric_limits<double>::infinity();
  for (int mask = 1; mask < (1 << n); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (mask & (1 << i)) idx.push_back(i);
    const int m = static_cast<int>(idx.size());
    Eigen::MatrixXd P(3, m);
    for (int j = 0; j < m; ++j) P.col(j) = pts[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
    Eigen::VectorXd w;
    if (m == 1) {
      w = Eigen::VectorXd::Ones(1);
    } else {
      Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(m, m - 1);
      for (int j = 0; j < m - 1; ++j) {
        Z(0, j) = -1.0;
        Z(j + 1, j) = 1.0;
      }
      const Eigen::MatrixXd A = P * Z;
      Eigen::VectorXd w0 = Eigen::VectorXd::Zero(m);
      w0(0) = 1.0;
      const Eigen::VectorXd u = (A.transpose() * A).ldlt().solve(A.transpose() * (p - P * w0));
      w = w0 + Z * u;
    }
    if ((w.array() < -1e-12).any()) continue;
    best = std::min(best, (P * w - p).norm());
  }
  return best;
}

double bruteDistance(const OccupancyGrid& g, int i, int j, int k, double max_dist) {
  double best_sq = std::numeric_limits<double>::infinity();
  for (int kk = 0; kk < g.nz(); ++kk)
    for (int jj = 0; jj < g.ny(); ++jj)
      for (int ii = 0; ii < g.nx(); ++ii)
        if (g.occupied(ii, jj, kk)) {
          const double dx = ii - i, dy = jj - j, dz = kk - k;
          best_sq = std::min(best_sq, dx * dx + dy * dy + dz * dz);
        }
  if (!std::isfinite(best_sq)) return max_dist;
  return std::min(std::sqrt(best_sq) * g.resolution(), max_dist);
}

CheckLine gradientLine(const std::string& term, TermFn fn, const CheckOptions& opts,
                       double tolerance, bool with_obstacles, bool perturb) {
  CheckLine line;
  line.name = "gradient/" + term;
  line.tolerance = tolerance;
  Rng rng(opts.seed * 1000003 + static_cast<std::uint64_t>(term.size()));
  const WorkspaceParams ws;

  std::shared_ptr<const EsdfGrid> esdf;
  const double d_thr = 0.25;
  if (with_obstacles) {
    OccupancyGrid grid(Vector3d::Zero(), 0.1, 30, 30, 30);
    for (int n = 0; n < 15; ++n)
      grid.setOccupied(static_cast<int>(rng.uniformInt(5, 24)),
                       static_cast<int>(rng.uniformInt(5, 24)),
                       static_cast<int>(rng.uniformInt(5, 24)));
    esdf = std::make_shared<const EsdfGrid>(EsdfGrid::build(grid));
  }

  int retry_budget = 20 * opts.gradient_configs;
  for (int trial = 0; trial < opts.gradient_configs; ++trial) {
    const BSplineCurve guide = randomGuide(rng, 10, 5.0);
    const CostContext ctx(guide, ws, CostWeights{}, esdf, d_thr);
    ControlPoints q = guide.controlPoints();
    if (with_obstacles) {
      // keep each point off trilinear cell faces and clear of the hinge
      // threshold so the stencil sees a smooth function
      bool placed = true;
      for (int i = 0; i < ctx.numControlPoints() && placed; ++i) {
        Vector3d p;
        for (int attempt = 0;; ++attempt) {
          p = rng.uniformBox(Vector3d(0.2, 0.2, 0.2), Vector3d(2.8, 2.8, 2.8));
          bool ok = true;
          for (int a = 0; a < 3; ++a) {
            const double u = p[a] / 0.1 - 0.5;
            if (std::abs(u - std::round(u)) < 0.1) ok = false;
          }
          if (std::abs(esdf->query(p).distance - d_thr) < 5e-3) ok = false;
          if (ok) break;
          if (attempt > 500) {
            placed = false;
            break;
          }
        }
        q[static_cast<std::size_t>(i)] = p;
      }
      // a draw whose points all sit past the threshold exercises nothing;
      // redraw so every configuration contributes a live hinge
      if ((!placed || fn(q, ctx, nullptr) == 0.0) && retry_budget-- > 0) {
        --trial;
        continue;
      }
    } else {
      for (int i = ctx.freeLo(); i <= ctx.freeHi(); ++i)
        q[static_cast<std::size_t>(i)] += safeOffset(rng, ws);
    }
    const bool flip = perturb && trial == 0;
    line.worst = std::max(line.worst, gradientWorst(fn, q, ctx, flip));
  }

  std::ostringstream os;
  os << "analytic vs central difference, " << opts.gradient_configs << " random configurations";
  if (perturb) os << " (one analytic component sign-flipped as a negative control)";
  line.detail = os.str();
  line.pass = line.worst < line.tolerance;
  return line;
}

CheckLine hullLine(const CheckOptions& opts) {
  CheckLine line;
  line.name = "spline/hull-containment";
  line.tolerance = 1e-9;
  Rng rng(opts.seed * 2000003);
  for (int c = 0; c < opts.hull_curves; ++c) {
    const BSplineCurve curve = randomGuide(rng, 8 + static_cast<int>(rng.uniformInt(0, 5)),
                                           rng.uniform(2.0, 8.0));
    for (int s = 0; s < opts.hull_samples; ++s) {
      const double t = rng.uniform(curve.domainStart(), curve.domainEnd());
      const auto hull = curve.segmentHull(curve.segmentOfParameter(t));
      line.worst = std::max(line.worst, hullDistance(hull, curve.evaluate(t)));
    }
  }
  std::ostringstream os;
  os << "curve point vs convex hull of its segment control points, " << opts.hull_curves
     << " curves x " << opts.hull_samples << " samples";
  line.detail = os.str();
  line.pass = line.worst < line.tolerance;
  return line;
}

CheckLine esdfLine(const CheckOptions& opts) {
  CheckLine line;
  line.name = "esdf/exhaustive-distance";
  line.tolerance = 1e-12;  // relative; both sides are exact center distances
  Rng rng(opts.seed * 3000017);
  const int n = opts.esdf_size;
  for (int g = 0; g < opts.esdf_grids; ++g) {
    OccupancyGrid grid(Vector3d(-1, 0.5, 2), 0.1, n, n, n);
    const int fill = static_cast<int>(rng.uniformInt(1, std::max(2, n * n / 8)));
    for (int v = 0; v < fill; ++v)
      grid.setOccupied(static_cast<int>(rng.uniformInt(0, n - 1)),
                       static_cast<int>(rng.uniformInt(0, n - 1)),
                       static_cast<int>(rng.uniformInt(0, n - 1)));
    const EsdfGrid esdf = EsdfGrid::build(grid);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const double expect = bruteDistance(grid, i, j, k, esdf.maxDistance());
          const double got = esdf.distanceAt(i, j, k);
          line.worst = std::max(line.worst,
                                std::abs(got - expect) / std::max(1.0, std::abs(expect)));
        }
  }
  std::ostringstream os;
  os << "transform vs exhaustive nearest-voxel search, " << opts.esdf_grids << " grids of "
     << n << "^3 voxels, every center";
  line.detail = os.str();
  line.pass = line.worst < line.tolerance;
  return line;
}

}  // namespace

CheckReport runChecks(const CheckOptions& opts) {
  CheckReport report;
  report.lines.push_back(gradientLine("smoothness", &smoothnessCost, opts, 1e-5, false,
                                      opts.perturb_gradient));
  report.lines.push_back(gradientLine("workspace", &workspaceCost, opts, 1e-5, false, false));
  report.lines.push_back(gradientLine("yaw-rate", &yawRateCost, opts, 1e-5, false, false));
  report.lines.push_back(gradientLine("obstacle", &obstacleCost, opts, 1e-4, true, false));
  report.lines.push_back(hullLine(opts));
  report.lines.push_back(esdfLine(opts));
  for (const CheckLine& line : report.lines) report.ok = report.ok && line.pass;
  return report;
}

void printChecks(std::ostream& os, const CheckReport& report) {
  for (const CheckLine& line : report.lines) {
    os << (line.pass ? "PASS" : "FAIL") << "  " << line.name << "  worst " << line.worst
       << " vs " << line.tolerance << "  (" << line.detail << ")\n";
  }
  os << (report.ok ? "all checks passed" : "CHECKS FAILED") << "\n";
}

}  // namespace ringo
