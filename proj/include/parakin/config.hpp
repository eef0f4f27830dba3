#pragma once

#include <string>
#include <vector>

#include "parakin/cell_tree.hpp"
#include "parakin/geometry.hpp"

namespace parakin {

struct RenderConfig {
  int width = 900;
  int height = 600;
  std::string palette = "default";

  bool operator==(const RenderConfig&) const = default;

  void validate() const {
    if (width < 8 || width > 8192 || height < 8 || height > 8192)
      throw ValidationError("render: width/height must be in [8, 8192]");
    if (palette != "default")
      throw ValidationError("render: unknown palette '" + palette + "'");
  }
};

// A named task carried in a config file: waypoints for point-to-point,
// vertices for continuous (plus an optional sampling step).
struct TaskSpec {
  std::string name;
  std::vector<PlatformConfig> points;
  double step = 0.0;  // continuous only; 0 = use the atlas default

  bool operator==(const TaskSpec& o) const {
    if (name != o.name || step != o.step || points.size() != o.points.size())
      return false;
    for (size_t i = 0; i < points.size(); ++i)
      if (points[i].x != o.points[i].x || points[i].y != o.points[i].y) return false;
    return true;
  }
};

// Flat key-value run configuration; see parse_config for the key set.
struct RunConfig {
  ManipulatorGeometry geometry;
  DecompositionConfig decomp;
  RenderConfig render;
  std::vector<TaskSpec> pp_tasks;
  std::vector<TaskSpec> ct_tasks;

  bool operator==(const RunConfig&) const = default;
};

// Keys: geometry.L0..L4, geometry.theta_min, geometry.theta_max,
// decomp.max_depth, decomp.samples_per_axis, decomp.kappa_a, decomp.kappa_b,
// decomp.leaf_budget, decomp.root_box (xmin ymin xmax ymax),
// render.width, render.height, render.palette,
// task.pp.<name> (x y pairs), task.ct.<name> (x y pairs),
// task.ct.<name>.step. '#' starts a comment. Geometry keys are required;
// everything else has the documented default.
RunConfig parse_config(const std::string& text);

// Deterministic form whose parse is the identity.
std::string serialize_config(const RunConfig& cfg);

// The shipped default: the reference five-bar with depth-8 decomposition.
RunConfig default_run_config();

// Task files: lines `point = x y` (point-to-point) or `vertex = x y`
// (continuous), optional `step = s` for continuous.
struct TaskFile {
  bool continuous = false;
  TaskSpec task;
};
TaskFile parse_task_file(const std::string& text);

}  // namespace parakin
