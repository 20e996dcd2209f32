#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace ringo {

// Axis-aligned voxel grid of occupancy flags. Voxel (i, j, k) covers the
// cube [origin + res*(i,j,k), origin + res*(i+1,j+1,k+1)); its center sits
// at origin + res*(i+0.5, j+0.5, k+0.5). Storage is x-fastest.
class OccupancyGrid {
 public:
  OccupancyGrid(const Eigen::Vector3d& origin, double resolution, int nx, int ny, int nz);

  const Eigen::Vector3d& origin() const { return origin_; }
  double resolution() const { return res_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }
  std::size_t numVoxels() const { return occ_.size(); }

  bool inBounds(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < nx_ && j < ny_ && k < nz_;
  }
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(nx_) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(ny_) * static_cast<std::size_t>(k));
  }
  bool occupied(int i, int j, int k) const { return occ_[index(i, j, k)] != 0; }
  void setOccupied(int i, int j, int k) { occ_[index(i, j, k)] = 1; }

  Eigen::Vector3d voxelCenter(int i, int j, int k) const {
    return origin_ + res_ * Eigen::Vector3d(i + 0.5, j + 0.5, k + 0.5);
  }
  // Voxel containing p (floor), unclamped: may be out of bounds.
  Eigen::Vector3i voxelOf(const Eigen::Vector3d& p) const;
  bool contains(const Eigen::Vector3d& p) const;

  // Marks the voxel containing each point; points outside the grid are
  // ignored. Returns the number of points applied.
  std::size_t markPoints(const std::vector<Eigen::Vector3d>& points);

  std::size_t occupiedCount() const;

 private:
  Eigen::Vector3d origin_;
  double res_;
  int nx_, ny_, nz_;
  std::vector<std::uint8_t> occ_;
};

struct EsdfQuery {
  double distance = 0.0;
  Eigen::Vector3d gradient = Eigen::Vector3d::Zero();  // of the interpolant, away from obstacles
  bool clamped = false;                                // query point outside the grid volume
};

// Euclidean distance field to the nearest occupied voxel center, exact at
// voxel centers, trilinearly interpolated in between. Immutable once built,
// safe for concurrent reads.
class EsdfGrid {
 public:
  // max_distance: value reported where no occupied voxel exists (and an
  // upper cap applied everywhere). Defaults to the grid diagonal, which can
  // never bind on a grid containing at least one occupied voxel.
  static EsdfGrid build(const OccupancyGrid& grid, double max_distance = -1.0);

  const Eigen::Vector3d& origin() const { return origin_; }
  double resolution() const { return res_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }
  double maxDistance() const { return max_distance_; }

  double distanceAt(int i, int j, int k) const { return dist_[index(i, j, k)]; }
  Eigen::Vector3d voxelCenter(int i, int j, int k) const {
    return origin_ + res_ * Eigen::Vector3d(i + 0.5, j + 0.5, k + 0.5);
  }
  Eigen::Vector3i voxelOf(const Eigen::Vector3d& p) const;
  bool inBounds(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < nx_ && j < ny_ && k < nz_;
  }
  bool contains(const Eigen::Vector3d& p) const;

  // Interpolated distance and analytic gradient of the interpolant. Queries
  // outside the grid clamp to the boundary and set the flag.
  EsdfQuery query(const Eigen::Vector3d& p) const;

  // Text header "esdf ox oy oz res nx ny nz" followed by nx*ny*nz
  // little-endian float32 distances, x-fastest.
  void dump(std::ostream& os) const;

 private:
  EsdfGrid() = default;
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(nx_) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(ny_) * static_cast<std::size_t>(k));
  }

  Eigen::Vector3d origin_ = Eigen::Vector3d::Zero();
  double res_ = 0.1;
  int nx_ = 0, ny_ = 0, nz_ = 0;
  double max_distance_ = 0.0;
  std::vector<double> dist_;
};

// Parses a dump produced by EsdfGrid::dump.
struct EsdfDump {
  Eigen::Vector3d origin;
  double resolution;
  int nx, ny, nz;
  std::vector<float> values;
};
EsdfDump readEsdfDump(std::istream& is);

}  // namespace ringo
