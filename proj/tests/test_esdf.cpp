#include "ringo/esdf.hpp"

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "ringo/errors.hpp"
#include "ringo/rng.hpp"

using Eigen::Vector3d;
using namespace ringo;

namespace {

// Brute-force exact distance: min over occupied voxel centers.
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

}  // namespace

TEST_CASE("single occupied voxel: exact distances at centers") {
  OccupancyGrid g(Vector3d::Zero(), 0.1, 9, 9, 9);
  g.setOccupied(4, 4, 4);
  const EsdfGrid e = EsdfGrid::build(g);
  CHECK(e.distanceAt(4, 4, 4) == 0.0);
  CHECK(e.distanceAt(5, 4, 4) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(e.distanceAt(5, 5, 4) == doctest::Approx(0.1 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(e.distanceAt(5, 5, 5) == doctest::Approx(0.1 * std::sqrt(3.0)).epsilon(1e-12));
  CHECK(e.distanceAt(0, 4, 4) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("distance transform matches brute force on random grids") {
  Rng rng(555);
  for (int trial = 0; trial < 25; ++trial) {
    OccupancyGrid g(Vector3d(-1, 0.5, 2), 0.1, 20, 20, 20);
    const int fill = static_cast<int>(rng.uniformInt(1, 60));
    for (int n = 0; n < fill; ++n)
      g.setOccupied(static_cast<int>(rng.uniformInt(0, 19)), static_cast<int>(rng.uniformInt(0, 19)),
                    static_cast<int>(rng.uniformInt(0, 19)));
    const EsdfGrid e = EsdfGrid::build(g);
    for (int q = 0; q < 60; ++q) {
      const int i = static_cast<int>(rng.uniformInt(0, 19));
      const int j = static_cast<int>(rng.uniformInt(0, 19));
      const int k = static_cast<int>(rng.uniformInt(0, 19));
      const double expect = bruteDistance(g, i, j, k, e.maxDistance());
      CHECK(e.distanceAt(i, j, k) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("empty grid reports the configured maximum everywhere") {
  OccupancyGrid g(Vector3d::Zero(), 0.2, 8, 8, 8);
  const EsdfGrid e = EsdfGrid::build(g, 5.0);
  CHECK(e.maxDistance() == 5.0);
  for (int k = 0; k < 8; ++k)
    for (int j = 0; j < 8; ++j)
      for (int i = 0; i < 8; ++i) CHECK(e.distanceAt(i, j, k) == 5.0);
  const EsdfQuery q = e.query(Vector3d(0.8, 0.8, 0.8));
  CHECK(q.distance == 5.0);
  CHECK(q.gradient.norm() == 0.0);
  CHECK(!q.clamped);
}

TEST_CASE("queries at voxel centers reproduce stored values exactly") {
  Rng rng(808);
  OccupancyGrid g(Vector3d(0.3, -0.7, 1.1), 0.05, 12, 10, 8);
  for (int n = 0; n < 15; ++n)
    g.setOccupied(static_cast<int>(rng.uniformInt(0, 11)), static_cast<int>(rng.uniformInt(0, 9)),
                  static_cast<int>(rng.uniformInt(0, 7)));
  const EsdfGrid e = EsdfGrid::build(g);
  for (int k = 0; k < 8; ++k)
    for (int j = 0; j < 10; ++j)
      for (int i = 0; i < 12; ++i) {
        const EsdfQuery q = e.query(e.voxelCenter(i, j, k));
        CHECK(q.distance == e.distanceAt(i, j, k));
        CHECK(!q.clamped);
      }
}

TEST_CASE("interpolated distance is continuous and gradient matches finite differences") {
  Rng rng(90210);
  OccupancyGrid g(Vector3d::Zero(), 0.1, 16, 16, 16);
  for (int n = 0; n < 20; ++n)
    g.setOccupied(static_cast<int>(rng.uniformInt(0, 15)), static_cast<int>(rng.uniformInt(0, 15)),
                  static_cast<int>(rng.uniformInt(0, 15)));
  const EsdfGrid e = EsdfGrid::build(g);
  int tested = 0;
  while (tested < 200) {
    const Vector3d p = rng.uniformBox(Vector3d(0.15, 0.15, 0.15), Vector3d(1.45, 1.45, 1.45));
    // keep away from cell faces: gradient of the interpolant is
    // discontinuous across them
    bool safe = true;
    for (int a = 0; a < 3; ++a) {
      const double u = p[a] / 0.1 - 0.5;
      if (std::abs(u - std::round(u)) < 0.1) safe = false;
    }
    if (!safe) continue;
    ++tested;
    const EsdfQuery q = e.query(p);
    const double h = 1e-3 * 0.1;  // well inside the cell
    Vector3d fd;
    for (int a = 0; a < 3; ++a) {
      Vector3d lo = p, hi = p;
      lo[a] -= h;
      hi[a] += h;
      fd[a] = (e.query(hi).distance - e.query(lo).distance) / (2 * h);
    }
    CHECK((fd - q.gradient).norm() < 1e-6 * std::max(1.0, q.gradient.norm()));
  }
}

TEST_CASE("gradient near a flat wall points away from it") {
  OccupancyGrid g(Vector3d::Zero(), 0.1, 20, 10, 10);
  for (int k = 0; k < 10; ++k)
    for (int j = 0; j < 10; ++j) g.setOccupied(0, j, k);  // wall at x = 0 slab
  const EsdfGrid e = EsdfGrid::build(g);
  for (double x : {0.35, 0.77, 1.23}) {
    const EsdfQuery q = e.query(Vector3d(x, 0.5, 0.5));
    CHECK(q.gradient.x() > 0.9);
    CHECK(std::abs(q.gradient.y()) < 0.1);
    CHECK(std::abs(q.gradient.z()) < 0.1);
  }
}

TEST_CASE("interpolated field respects the 1-Lipschitz property of distances") {
  Rng rng(777);
  OccupancyGrid g(Vector3d::Zero(), 0.1, 14, 14, 14);
  for (int n = 0; n < 10; ++n)
    g.setOccupied(static_cast<int>(rng.uniformInt(0, 13)), static_cast<int>(rng.uniformInt(0, 13)),
                  static_cast<int>(rng.uniformInt(0, 13)));
  const EsdfGrid e = EsdfGrid::build(g);
  for (int q = 0; q < 500; ++q) {
    const Vector3d a = rng.uniformBox(Vector3d(0.1, 0.1, 0.1), Vector3d(1.3, 1.3, 1.3));
    Vector3d b = a + rng.uniformBox(Vector3d(-0.3, -0.3, -0.3), Vector3d(0.3, 0.3, 0.3));
    b = b.cwiseMax(Vector3d(0.05, 0.05, 0.05)).cwiseMin(Vector3d(1.35, 1.35, 1.35));
    const double da = e.query(a).distance;
    const double db = e.query(b).distance;
    // trilinear interpolation of an exact distance field keeps Lipschitz-1
    // along axes; allow a small slack for the diagonal mix
    CHECK(std::abs(da - db) <= (a - b).norm() * std::sqrt(3.0) + 1e-12);
  }
}

TEST_CASE("out-of-bounds queries clamp and flag") {
  OccupancyGrid g(Vector3d::Zero(), 0.1, 10, 10, 10);
  g.setOccupied(5, 5, 5);
  const EsdfGrid e = EsdfGrid::build(g);
  const EsdfQuery inside = e.query(Vector3d(0.5, 0.5, 0.5));
  CHECK(!inside.clamped);
  const EsdfQuery outside = e.query(Vector3d(-0.5, 0.5, 0.5));
  CHECK(outside.clamped);
  const EsdfQuery corner = e.query(Vector3d(2.0, 2.0, 2.0));
  CHECK(corner.clamped);
  // clamped result equals the boundary query
  const EsdfQuery edge = e.query(Vector3d(0.05, 0.5, 0.5));
  CHECK(outside.distance == doctest::Approx(edge.distance).epsilon(1e-12));
}

TEST_CASE("dump and read round trip") {
  Rng rng(31);
  OccupancyGrid g(Vector3d(1.0, 2.0, 3.0), 0.25, 6, 5, 4);
  for (int n = 0; n < 6; ++n)
    g.setOccupied(static_cast<int>(rng.uniformInt(0, 5)), static_cast<int>(rng.uniformInt(0, 4)),
                  static_cast<int>(rng.uniformInt(0, 3)));
  const EsdfGrid e = EsdfGrid::build(g);
  std::stringstream ss;
  e.dump(ss);
  const EsdfDump back = readEsdfDump(ss);
  CHECK(back.nx == 6);
  CHECK(back.ny == 5);
  CHECK(back.nz == 4);
  CHECK(back.resolution == 0.25);
  CHECK((back.origin - Vector3d(1.0, 2.0, 3.0)).norm() == 0.0);
  REQUIRE(back.values.size() == g.numVoxels());
  // x-fastest ordering
  std::size_t n = 0;
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 5; ++j)
      for (int i = 0; i < 6; ++i)
        CHECK(back.values[n++] == doctest::Approx(e.distanceAt(i, j, k)).epsilon(1e-6));
}

TEST_CASE("truncated dump payload is rejected") {
  OccupancyGrid g(Vector3d::Zero(), 0.1, 4, 4, 4);
  const EsdfGrid e = EsdfGrid::build(g);
  std::stringstream ss;
  e.dump(ss);
  std::string blob = ss.str();
  blob.resize(blob.size() - 10);
  std::stringstream cut(blob);
  CHECK_THROWS_AS(readEsdfDump(cut), ConfigError);
}

TEST_CASE("occupancy grid point marking") {
  OccupancyGrid g(Vector3d::Zero(), 0.1, 10, 10, 10);
  const std::vector<Vector3d> pts = {{0.05, 0.05, 0.05}, {0.95, 0.95, 0.95}, {5.0, 0, 0}};
  CHECK(g.markPoints(pts) == 2);  // the far point is ignored
  CHECK(g.occupied(0, 0, 0));
  CHECK(g.occupied(9, 9, 9));
  CHECK(g.occupiedCount() == 2);
}

TEST_CASE("grid construction validates inputs") {
  CHECK_THROWS_AS(OccupancyGrid(Vector3d::Zero(), 0.0, 4, 4, 4), ConfigError);
  CHECK_THROWS_AS(OccupancyGrid(Vector3d::Zero(), 0.1, 0, 4, 4), ConfigError);
}
