#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>

namespace ringo {

// Seeded RNG with hand-rolled draw helpers. std::mt19937_64 is specified
// bit-for-bit by the standard while the <random> distributions are not, so
// drawing through these helpers keeps scenario generation reproducible
// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  // Uniform in [0, 1).
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [lo, hi] inclusive.
  std::int64_t uniformInt(std::int64_t lo, std::int64_t hi) {
    const auto range = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(gen_() % range);
  }

  Eigen::Vector3d uniformBox(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
    return {uniform(lo.x(), hi.x()), uniform(lo.y(), hi.y()), uniform(lo.z(), hi.z())};
  }

  // Approximately normal draw (sum of uniforms), good enough for jitter.
  double jitter(double scale) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += uniform01();
    return (s - 2.0) * scale;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace ringo
