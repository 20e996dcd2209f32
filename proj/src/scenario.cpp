#include "ringo/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <json.hpp>
#include <sstream>

#include "ringo/errors.hpp"
#include "ringo/rng.hpp"

namespace ringo {

using nlohmann::json;

const char* modeName(PlanMode mode) {
  return mode == PlanMode::Proposed ? "proposed" : "baseline";
}

PlanMode parseMode(const std::string& name) {
  if (name == "proposed") return PlanMode::Proposed;
  if (name == "baseline") return PlanMode::Baseline;
  throw ConfigError("mode must be \"proposed\" or \"baseline\", got \"" + name + "\"");
}

bool insideBox(const BoxObstacle& b, const Eigen::Vector3d& p) {
  return (p.array() >= b.min.array()).all() && (p.array() <= b.max.array()).all();
}

bool insideCylinder(const CylinderObstacle& c, const Eigen::Vector3d& p) {
  return std::hypot(p.x() - c.x, p.y() - c.y) <= c.radius && p.z() >= c.z0 && p.z() <= c.z1;
}

bool insideRing(const RingObstacle& r, const Eigen::Vector3d& p) {
  const Eigen::Vector3d d = p - r.center;
  double u, v, w;
  switch (r.axis) {
    case 'x': w = d.x(), u = d.y(), v = d.z(); break;
    case 'y': w = d.y(), u = d.x(), v = d.z(); break;
    case 'z': w = d.z(), u = d.x(), v = d.y(); break;
    default: throw ConfigError("ring axis must be 'x', 'y' or 'z'");
  }
  const double ring_plane = std::hypot(u, v) - r.major_radius;
  return ring_plane * ring_plane + w * w <= r.minor_radius * r.minor_radius;
}

OccupancyGrid buildMap(const MapSpec& spec, std::uint64_t seed, const Eigen::Vector3d& start,
                       const Eigen::Vector3d& goal) {
  OccupancyGrid grid(spec.origin, spec.resolution, spec.nx, spec.ny, spec.nz);

  std::vector<CylinderObstacle> columns = spec.cylinders;
  if (spec.forest && spec.forest->count > 0) {
    const ForestSpec& f = *spec.forest;
    Rng rng(seed);
    const double x_lo = spec.origin.x(), x_hi = spec.origin.x() + spec.nx * spec.resolution;
    const double y_lo = spec.origin.y(), y_hi = spec.origin.y() + spec.ny * spec.resolution;
    const double z_lo = spec.origin.z(), z_hi = spec.origin.z() + spec.nz * spec.resolution;
    for (int n = 0; n < f.count; ++n) {
      bool placed = false;
      for (int attempt = 0; attempt < f.max_retries_per_column; ++attempt) {
        CylinderObstacle c;
        c.x = rng.uniform(x_lo, x_hi);
        c.y = rng.uniform(y_lo, y_hi);
        c.radius = rng.uniform(f.radius_min, f.radius_max);
        c.z0 = z_lo;
        c.z1 = z_hi;
        const double to_start = std::hypot(c.x - start.x(), c.y - start.y()) - c.radius;
        const double to_goal = std::hypot(c.x - goal.x(), c.y - goal.y()) - c.radius;
        if (to_start < f.keep_out || to_goal < f.keep_out) continue;
        columns.push_back(c);
        placed = true;
        break;
      }
      if (!placed) {
        std::ostringstream os;
        os << "could not place forest column " << n + 1 << " of " << f.count << " after "
           << f.max_retries_per_column << " attempts (keep-out " << f.keep_out << " m)";
        throw GenerationError(os.str());
      }
    }
  }

  for (int k = 0; k < spec.nz; ++k)
    for (int j = 0; j < spec.ny; ++j)
      for (int i = 0; i < spec.nx; ++i) {
        const Eigen::Vector3d c = grid.voxelCenter(i, j, k);
        bool occ = false;
        for (const auto& b : spec.boxes) occ = occ || insideBox(b, c);
        for (const auto& cy : columns) occ = occ || insideCylinder(cy, c);
        for (const auto& r : spec.rings) occ = occ || insideRing(r, c);
        if (occ) grid.setOccupied(i, j, k);
      }
  return grid;
}

EePlanRequest Scenario::eeRequest() const {
  EePlanRequest req = ee;
  req.xve_start = xve_start;
  req.xve_goal = xve_goal;
  req.body_clearance = body_clearance;
  req.ee_clearance = ee_clearance;
  return req;
}

void Scenario::validate() const {
  if (map.resolution <= 0) throw ConfigError("map.resolution must be positive");
  if (map.nx < 1 || map.ny < 1 || map.nz < 1)
    throw ConfigError("map.size entries must be at least 1");
  for (const auto& b : map.boxes)
    if ((b.max.array() < b.min.array()).any()) throw ConfigError("boxes: max must be >= min");
  for (const auto& c : map.cylinders)
    if (c.radius < 0 || c.z1 < c.z0) throw ConfigError("cylinders: radius >= 0 and z1 >= z0");
  for (const auto& r : map.rings) {
    if (r.axis != 'x' && r.axis != 'y' && r.axis != 'z')
      throw ConfigError("rings.axis must be \"x\", \"y\" or \"z\"");
    if (r.major_radius <= 0 || r.minor_radius <= 0 || r.minor_radius >= r.major_radius)
      throw ConfigError("rings: need 0 < minor_radius < major_radius");
  }
  if (map.forest) {
    const ForestSpec& f = *map.forest;
    if (f.count < 0 || f.radius_min < 0 || f.radius_max < f.radius_min || f.keep_out < 0 ||
        f.max_retries_per_column < 1)
      throw ConfigError("forest: count/radii/keep_out/max_retries_per_column out of range");
  }
  if (body_clearance < 0 || ee_clearance < 0)
    throw ConfigError("clearance radii must be non-negative");
  if (reveal_radius < 0) throw ConfigError("reveal_radius must be non-negative");
  if (goal_tolerance <= 0) throw ConfigError("goal_tolerance must be positive");
  if (obstacle_threshold <= 0) throw ConfigError("obstacle_threshold must be positive");
  guide.validate();
  workspace.validate();
  arm.validate();
  eeRequest().validate();
}

namespace {

[[noreturn]] void badField(const std::string& path, const char* why) {
  throw ConfigError("scenario field \"" + path + "\" " + why);
}

void checkKeys(const json& j, const std::string& path, std::initializer_list<const char*> known) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown scenario field \"" + path + key + "\"");
  }
}

double numberAt(const json& j, const std::string& path, const char* key, double def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_number()) badField(path + key, "must be a number");
  return j.at(key).get<double>();
}

int intAt(const json& j, const std::string& path, const char* key, int def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_number_integer()) badField(path + key, "must be an integer");
  return j.at(key).get<int>();
}

Eigen::Vector3d vec3At(const json& j, const std::string& path, const char* key,
                       const Eigen::Vector3d& def) {
  if (!j.contains(key)) return def;
  const json& a = j.at(key);
  if (!a.is_array() || a.size() != 3 || !a[0].is_number() || !a[1].is_number() ||
      !a[2].is_number())
    badField(path + key, "must be an array of three numbers");
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

std::string stringAt(const json& j, const std::string& path, const char* key,
                     const std::string& def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_string()) badField(path + key, "must be a string");
  return j.at(key).get<std::string>();
}

MapSpec parseMap(const json& j, const std::string& path) {
  checkKeys(j, path, {"origin", "resolution", "size", "boxes", "cylinders", "rings", "forest"});
  MapSpec m;
  m.origin = vec3At(j, path, "origin", m.origin);
  m.resolution = numberAt(j, path, "resolution", m.resolution);
  if (j.contains("size")) {
    const json& s = j.at("size");
    if (!s.is_array() || s.size() != 3 || !s[0].is_number_integer() ||
        !s[1].is_number_integer() || !s[2].is_number_integer())
      badField(path + "size", "must be an array of three integers");
    m.nx = s[0].get<int>();
    m.ny = s[1].get<int>();
    m.nz = s[2].get<int>();
  }
  if (j.contains("boxes")) {
    if (!j.at("boxes").is_array()) badField(path + "boxes", "must be an array");
    for (std::size_t i = 0; i < j.at("boxes").size(); ++i) {
      const json& b = j.at("boxes")[i];
      const std::string p = path + "boxes[" + std::to_string(i) + "].";
      checkKeys(b, p, {"min", "max"});
      BoxObstacle box;
      box.min = vec3At(b, p, "min", Eigen::Vector3d::Zero());
      box.max = vec3At(b, p, "max", Eigen::Vector3d::Zero());
      m.boxes.push_back(box);
    }
  }
  if (j.contains("cylinders")) {
    if (!j.at("cylinders").is_array()) badField(path + "cylinders", "must be an array");
    for (std::size_t i = 0; i < j.at("cylinders").size(); ++i) {
      const json& c = j.at("cylinders")[i];
      const std::string p = path + "cylinders[" + std::to_string(i) + "].";
      checkKeys(c, p, {"x", "y", "radius", "z0", "z1"});
      CylinderObstacle cy;
      cy.x = numberAt(c, p, "x", 0.0);
      cy.y = numberAt(c, p, "y", 0.0);
      cy.radius = numberAt(c, p, "radius", cy.radius);
      cy.z0 = numberAt(c, p, "z0", cy.z0);
      cy.z1 = numberAt(c, p, "z1", cy.z1);
      m.cylinders.push_back(cy);
    }
  }
  if (j.contains("rings")) {
    if (!j.at("rings").is_array()) badField(path + "rings", "must be an array");
    for (std::size_t i = 0; i < j.at("rings").size(); ++i) {
      const json& r = j.at("rings")[i];
      const std::string p = path + "rings[" + std::to_string(i) + "].";
      checkKeys(r, p, {"center", "axis", "major_radius", "minor_radius"});
      RingObstacle ring;
      ring.center = vec3At(r, p, "center", ring.center);
      const std::string axis = stringAt(r, p, "axis", std::string(1, ring.axis));
      if (axis.size() != 1) badField(p + "axis", "must be \"x\", \"y\" or \"z\"");
      ring.axis = axis[0];
      ring.major_radius = numberAt(r, p, "major_radius", ring.major_radius);
      ring.minor_radius = numberAt(r, p, "minor_radius", ring.minor_radius);
      m.rings.push_back(ring);
    }
  }
  if (j.contains("forest")) {
    const json& f = j.at("forest");
    const std::string p = path + "forest.";
    checkKeys(f, p, {"count", "radius_min", "radius_max", "keep_out", "max_retries_per_column"});
    ForestSpec fs;
    fs.count = intAt(f, p, "count", fs.count);
    fs.radius_min = numberAt(f, p, "radius_min", fs.radius_min);
    fs.radius_max = numberAt(f, p, "radius_max", fs.radius_max);
    fs.keep_out = numberAt(f, p, "keep_out", fs.keep_out);
    fs.max_retries_per_column = intAt(f, p, "max_retries_per_column", fs.max_retries_per_column);
    m.forest = fs;
  }
  return m;
}

}  // namespace

Scenario parseScenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("scenario root must be a JSON object");
  checkKeys(j, "", {"name", "seed", "map", "start", "goal", "xve_start", "xve_goal",
                    "body_clearance", "ee_clearance", "reveal_radius", "goal_tolerance", "mode",
                    "guide", "workspace", "weights", "arm", "obstacle_threshold", "ee"});

  Scenario sc;
  sc.name = stringAt(j, "", "name", sc.name);
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer() || j.at("seed").get<std::int64_t>() < 0)
      badField("seed", "must be a non-negative integer");
    sc.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("map")) sc.map = parseMap(j.at("map"), "map.");
  sc.start = vec3At(j, "", "start", sc.start);
  sc.goal = vec3At(j, "", "goal", sc.goal);
  sc.xve_start = vec3At(j, "", "xve_start", sc.xve_start);
  sc.xve_goal = vec3At(j, "", "xve_goal", sc.xve_goal);
  sc.body_clearance = numberAt(j, "", "body_clearance", sc.body_clearance);
  sc.ee_clearance = numberAt(j, "", "ee_clearance", sc.ee_clearance);
  sc.reveal_radius = numberAt(j, "", "reveal_radius", sc.reveal_radius);
  sc.goal_tolerance = numberAt(j, "", "goal_tolerance", sc.goal_tolerance);
  sc.mode = parseMode(stringAt(j, "", "mode", modeName(sc.mode)));
  sc.obstacle_threshold = numberAt(j, "", "obstacle_threshold", sc.obstacle_threshold);

  if (j.contains("guide")) {
    const json& g = j.at("guide");
    checkKeys(g, "guide.",
              {"v_max", "a_max", "span_dt", "min_spans", "hover_duration", "refine_margin",
               "w_smooth", "w_clear", "w_dyn", "refine_iterations", "check_dt"});
    GuideConfig& c = sc.guide;
    c.v_max = numberAt(g, "guide.", "v_max", c.v_max);
    c.a_max = numberAt(g, "guide.", "a_max", c.a_max);
    c.span_dt = numberAt(g, "guide.", "span_dt", c.span_dt);
    c.min_spans = intAt(g, "guide.", "min_spans", c.min_spans);
    c.hover_duration = numberAt(g, "guide.", "hover_duration", c.hover_duration);
    c.refine_margin = numberAt(g, "guide.", "refine_margin", c.refine_margin);
    c.w_smooth = numberAt(g, "guide.", "w_smooth", c.w_smooth);
    c.w_clear = numberAt(g, "guide.", "w_clear", c.w_clear);
    c.w_dyn = numberAt(g, "guide.", "w_dyn", c.w_dyn);
    c.refine_iterations = intAt(g, "guide.", "refine_iterations", c.refine_iterations);
    c.check_dt = numberAt(g, "guide.", "check_dt", c.check_dt);
  }
  if (j.contains("workspace")) {
    const json& w = j.at("workspace");
    checkKeys(w, "workspace.", {"r_max", "r_min", "r_d", "z_d", "f_d", "k", "h_o", "h_l"});
    WorkspaceParams& p = sc.workspace;
    p.r_max = numberAt(w, "workspace.", "r_max", p.r_max);
    p.r_min = numberAt(w, "workspace.", "r_min", p.r_min);
    p.r_d = numberAt(w, "workspace.", "r_d", p.r_d);
    p.z_d = numberAt(w, "workspace.", "z_d", p.z_d);
    p.f_d = numberAt(w, "workspace.", "f_d", p.f_d);
    p.k = numberAt(w, "workspace.", "k", p.k);
    p.h_o = numberAt(w, "workspace.", "h_o", p.h_o);
    p.h_l = numberAt(w, "workspace.", "h_l", p.h_l);
  }
  if (j.contains("weights")) {
    const json& w = j.at("weights");
    checkKeys(w, "weights.", {"smooth", "workspace", "yaw", "obstacle"});
    sc.weights.smooth = numberAt(w, "weights.", "smooth", sc.weights.smooth);
    sc.weights.workspace = numberAt(w, "weights.", "workspace", sc.weights.workspace);
    sc.weights.yaw = numberAt(w, "weights.", "yaw", sc.weights.yaw);
    sc.weights.obstacle = numberAt(w, "weights.", "obstacle", sc.weights.obstacle);
  }
  if (j.contains("arm")) {
    const json& a = j.at("arm");
    checkKeys(a, "arm.", {"l1", "l2", "mount_offset"});
    sc.arm.l1 = numberAt(a, "arm.", "l1", sc.arm.l1);
    sc.arm.l2 = numberAt(a, "arm.", "l2", sc.arm.l2);
    sc.arm.mount_offset = vec3At(a, "arm.", "mount_offset", sc.arm.mount_offset);
  }
  if (j.contains("ee")) {
    const json& e = j.at("ee");
    checkKeys(e, "ee.",
              {"fit_samples_per_span", "check_samples_per_span", "workspace_margin",
               "joint_rate_hz", "max_iterations"});
    EePlanRequest& r = sc.ee;
    r.fit_samples_per_span = intAt(e, "ee.", "fit_samples_per_span", r.fit_samples_per_span);
    r.check_samples_per_span =
        intAt(e, "ee.", "check_samples_per_span", r.check_samples_per_span);
    r.workspace_margin = numberAt(e, "ee.", "workspace_margin", r.workspace_margin);
    r.joint_rate_hz = numberAt(e, "ee.", "joint_rate_hz", r.joint_rate_hz);
    r.optimizer.max_iterations =
        intAt(e, "ee.", "max_iterations", r.optimizer.max_iterations);
  }

  sc.validate();
  return sc;
}

Scenario loadScenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parseScenario(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::vector<std::string> loadScenarioList(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario list: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": not valid JSON: " + e.what());
  }
  const json* arr = nullptr;
  if (j.is_array()) {
    arr = &j;
  } else if (j.is_object() && j.contains("scenarios") && j.at("scenarios").is_array()) {
    arr = &j.at("scenarios");
  } else {
    throw ConfigError(path + ": expected an array or an object with a \"scenarios\" array");
  }
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  std::vector<std::string> out;
  for (const json& entry : *arr) {
    if (!entry.is_string()) throw ConfigError(path + ": scenario entries must be strings");
    std::filesystem::path p = entry.get<std::string>();
    if (p.is_relative()) p = base / p;
    out.push_back(p.string());
  }
  if (out.empty()) throw ConfigError(path + ": scenario list is empty");
  return out;
}

}  // namespace ringo
