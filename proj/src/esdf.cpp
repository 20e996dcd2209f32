#include "ringo/esdf.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "ringo/errors.hpp"

namespace ringo {

namespace {
// Large finite stand-in for "no site seen yet"; keeps the lower-envelope
// arithmetic NaN-free on all-free rows.
constexpr double kFar = 1e30;

// 1D squared distance transform (lower envelope of parabolas). f holds
// squared sources, d receives min_q (p-q)^2 + f[q]. Exact in integer-valued
// doubles.
void distanceTransform1d(const std::vector<double>& f, int n, std::vector<double>& d,
                         std::vector<int>& v, std::vector<double>& z) {
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s;
    while (true) {
      const int p = v[static_cast<std::size_t>(k)];
      s = ((f[static_cast<std::size_t>(q)] + static_cast<double>(q) * q) -
           (f[static_cast<std::size_t>(p)] + static_cast<double>(p) * p)) /
          (2.0 * q - 2.0 * p);
      if (s <= z[static_cast<std::size_t>(k)] && k > 0) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] = s;
    z[static_cast<std::size_t>(k) + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[static_cast<std::size_t>(k) + 1] < q) ++k;
    const int p = v[static_cast<std::size_t>(k)];
    const double dq = static_cast<double>(q - p);
    d[static_cast<std::size_t>(q)] = dq * dq + f[static_cast<std::size_t>(p)];
  }
}
}  // namespace

OccupancyGrid::OccupancyGrid(const Eigen::Vector3d& origin, double resolution, int nx, int ny,
                             int nz)
    : origin_(origin), res_(resolution), nx_(nx), ny_(ny), nz_(nz) {
  if (!(resolution > 0.0)) throw ConfigError("grid resolution must be positive");
  if (nx < 1 || ny < 1 || nz < 1) throw ConfigError("grid dimensions must be positive");
  occ_.assign(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
                  static_cast<std::size_t>(nz),
              0);
}

Eigen::Vector3i OccupancyGrid::voxelOf(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d u = (p - origin_) / res_;
  return {static_cast<int>(std::floor(u.x())), static_cast<int>(std::floor(u.y())),
          static_cast<int>(std::floor(u.z()))};
}

bool OccupancyGrid::contains(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d u = (p - origin_) / res_;
  return u.x() >= 0.0 && u.y() >= 0.0 && u.z() >= 0.0 && u.x() <= nx_ && u.y() <= ny_ &&
         u.z() <= nz_;
}

std::size_t OccupancyGrid::markPoints(const std::vector<Eigen::Vector3d>& points) {
  std::size_t applied = 0;
  for (const auto& p : points) {
    const Eigen::Vector3i v = voxelOf(p);
    if (inBounds(v.x(), v.y(), v.z())) {
      setOccupied(v.x(), v.y(), v.z());
      ++applied;
    }
  }
  return applied;
}

std::size_t OccupancyGrid::occupiedCount() const {
  std::size_t n = 0;
  for (const auto o : occ_) n += o;
  return n;
}

EsdfGrid EsdfGrid::build(const OccupancyGrid& grid, double max_distance) {
  EsdfGrid out;
  out.origin_ = grid.origin();
  out.res_ = grid.resolution();
  out.nx_ = grid.nx();
  out.ny_ = grid.ny();
  out.nz_ = grid.nz();
  const Eigen::Vector3d extent =
      grid.resolution() * Eigen::Vector3d(grid.nx(), grid.ny(), grid.nz());
  out.max_distance_ = max_distance > 0.0 ? max_distance : extent.norm();

  const int nx = out.nx_, ny = out.ny_, nz = out.nz_;
  std::vector<double> sq(grid.numVoxels());
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        sq[out.index(i, j, k)] = grid.occupied(i, j, k) ? 0.0 : kFar;

  const int nmax = std::max({nx, ny, nz});
  std::vector<double> f(static_cast<std::size_t>(nmax)), d(static_cast<std::size_t>(nmax));
  std::vector<double> z(static_cast<std::size_t>(nmax) + 1);
  std::vector<int> v(static_cast<std::size_t>(nmax));

  // x pass
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) f[static_cast<std::size_t>(i)] = sq[out.index(i, j, k)];
      distanceTransform1d(f, nx, d, v, z);
      for (int i = 0; i < nx; ++i) sq[out.index(i, j, k)] = d[static_cast<std::size_t>(i)];
    }
  // y pass
  for (int k = 0; k < nz; ++k)
    for (int i = 0; i < nx; ++i) {
      for (int j = 0; j < ny; ++j) f[static_cast<std::size_t>(j)] = sq[out.index(i, j, k)];
      distanceTransform1d(f, ny, d, v, z);
      for (int j = 0; j < ny; ++j) sq[out.index(i, j, k)] = d[static_cast<std::size_t>(j)];
    }
  // z pass
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      for (int k = 0; k < nz; ++k) f[static_cast<std::size_t>(k)] = sq[out.index(i, j, k)];
      distanceTransform1d(f, nz, d, v, z);
      for (int k = 0; k < nz; ++k) sq[out.index(i, j, k)] = d[static_cast<std::size_t>(k)];
    }

  out.dist_.resize(sq.size());
  for (std::size_t n = 0; n < sq.size(); ++n) {
    const double s = sq[n];
    out.dist_[n] = s >= kFar ? out.max_distance_
                             : std::min(std::sqrt(s) * out.res_, out.max_distance_);
  }
  return out;
}

Eigen::Vector3i EsdfGrid::voxelOf(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d u = (p - origin_) / res_;
  return {static_cast<int>(std::floor(u.x())), static_cast<int>(std::floor(u.y())),
          static_cast<int>(std::floor(u.z()))};
}

bool EsdfGrid::contains(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d u = (p - origin_) / res_;
  return u.x() >= 0.0 && u.y() >= 0.0 && u.z() >= 0.0 && u.x() <= nx_ && u.y() <= ny_ &&
         u.z() <= nz_;
}

EsdfQuery EsdfGrid::query(const Eigen::Vector3d& p) const {
  EsdfQuery out;
  out.clamped = !contains(p);

  // Interpolation lattice lives on voxel centers.
  double u[3] = {(p.x() - origin_.x()) / res_ - 0.5, (p.y() - origin_.y()) / res_ - 0.5,
                 (p.z() - origin_.z()) / res_ - 0.5};
  const int n[3] = {nx_, ny_, nz_};
  int i0[3];
  double fr[3];
  for (int a = 0; a < 3; ++a) {
    u[a] = std::clamp(u[a], 0.0, static_cast<double>(n[a] - 1));
    if (n[a] == 1) {
      i0[a] = 0;
      fr[a] = 0.0;
      continue;
    }
    i0[a] = std::min(static_cast<int>(std::floor(u[a])), n[a] - 2);
    fr[a] = u[a] - i0[a];
    // Snap to the lattice so center queries reproduce stored values exactly.
    if (fr[a] < 1e-9) fr[a] = 0.0;
    if (fr[a] > 1.0 - 1e-9) fr[a] = 1.0;
  }

  const auto at = [&](int dx, int dy, int dz) {
    return dist_[index(std::min(i0[0] + dx, n[0] - 1), std::min(i0[1] + dy, n[1] - 1),
                       std::min(i0[2] + dz, n[2] - 1))];
  };
  const double c000 = at(0, 0, 0), c100 = at(1, 0, 0), c010 = at(0, 1, 0), c110 = at(1, 1, 0);
  const double c001 = at(0, 0, 1), c101 = at(1, 0, 1), c011 = at(0, 1, 1), c111 = at(1, 1, 1);
  const double fx = fr[0], fy = fr[1], fz = fr[2];

  const double c00 = c000 * (1 - fx) + c100 * fx;
  const double c10 = c010 * (1 - fx) + c110 * fx;
  const double c01 = c001 * (1 - fx) + c101 * fx;
  const double c11 = c011 * (1 - fx) + c111 * fx;
  const double c0 = c00 * (1 - fy) + c10 * fy;
  const double c1 = c01 * (1 - fy) + c11 * fy;
  out.distance = c0 * (1 - fz) + c1 * fz;

  out.gradient.x() = ((c100 - c000) * (1 - fy) * (1 - fz) + (c110 - c010) * fy * (1 - fz) +
                      (c101 - c001) * (1 - fy) * fz + (c111 - c011) * fy * fz) /
                     res_;
  out.gradient.y() = ((c10 - c00) * (1 - fz) + (c11 - c01) * fz) / res_;
  out.gradient.z() = (c1 - c0) / res_;
  return out;
}

void EsdfGrid::dump(std::ostream& os) const {
  os << "esdf " << origin_.x() << ' ' << origin_.y() << ' ' << origin_.z() << ' ' << res_ << ' '
     << nx_ << ' ' << ny_ << ' ' << nz_ << '\n';
  std::vector<float> row(dist_.size());
  for (std::size_t i = 0; i < dist_.size(); ++i) row[i] = static_cast<float>(dist_[i]);
  os.write(reinterpret_cast<const char*>(row.data()),
           static_cast<std::streamsize>(row.size() * sizeof(float)));
}

EsdfDump readEsdfDump(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("esdf dump: missing header");
  std::istringstream hs(line);
  std::string magic;
  EsdfDump out;
  hs >> magic >> out.origin.x() >> out.origin.y() >> out.origin.z() >> out.resolution >> out.nx >>
      out.ny >> out.nz;
  if (!hs || magic != "esdf") throw ConfigError("esdf dump: malformed header");
  if (out.nx < 1 || out.ny < 1 || out.nz < 1 || !(out.resolution > 0))
    throw ConfigError("esdf dump: bad dimensions");
  const std::size_t count = static_cast<std::size_t>(out.nx) * static_cast<std::size_t>(out.ny) *
                            static_cast<std::size_t>(out.nz);
  out.values.resize(count);
  is.read(reinterpret_cast<char*>(out.values.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (static_cast<std::size_t>(is.gcount()) != count * sizeof(float))
    throw ConfigError("esdf dump: truncated payload");
  return out;
}

}  // namespace ringo
