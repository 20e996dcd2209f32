#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ringo {

// Self-diagnosis sweeps: every analytic quantity the planner relies on is
// re-derived by an independent method (central differences, exhaustive
// search, convex-hull least squares) over randomized inputs.
struct CheckOptions {
  int gradient_configs = 50;  // random configurations per cost term
  int hull_curves = 15;       // random curves for the hull property
  int hull_samples = 120;     // parameter samples per curve
  int esdf_grids = 5;         // random grids for the transform oracle
  int esdf_size = 16;         // voxels per grid side
  std::uint64_t seed = 1;
  // Negative control: flips the sign of one analytic gradient component in
  // the first smoothness configuration. A healthy checker must then fail.
  bool perturb_gradient = false;
};

struct CheckLine {
  std::string name;
  bool pass = false;
  double worst = 0.0;      // worst error the sweep observed
  double tolerance = 0.0;  // gate applied to it
  std::string detail;      // what was measured
};

struct CheckReport {
  std::vector<CheckLine> lines;
  bool ok = true;  // every line passed
};

CheckReport runChecks(const CheckOptions& opts = {});

// One line per check: PASS/FAIL, worst error against its gate, and the
// measurement description.
void printChecks(std::ostream& os, const CheckReport& report);

}  // namespace ringo
