#include "parakin/config.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "parakin/text.hpp"

namespace parakin {

namespace {

std::vector<PlatformConfig> parse_point_list(std::string_view value,
                                             const std::string& where) {
  auto toks = split_ws(value);
  if (toks.empty() || toks.size() % 2 != 0)
    throw ParseError(where + ": expected an even number of coordinates");
  std::vector<PlatformConfig> pts;
  for (size_t i = 0; i < toks.size(); i += 2) {
    PlatformConfig p{parse_double_or_throw(toks[i], where),
                     parse_double_or_throw(toks[i + 1], where)};
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw ValidationError(where + ": coordinates must be finite");
    pts.push_back(p);
  }
  return pts;
}

TaskSpec* find_or_add(std::vector<TaskSpec>& tasks, const std::string& name) {
  for (auto& t : tasks)
    if (t.name == name) return &t;
  tasks.push_back(TaskSpec{name, {}, 0.0});
  return &tasks.back();
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::map<std::string, bool> seen;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("line " + std::to_string(line_no) + ": expected key = value");
    std::string key(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 1));
    std::string where = "line " + std::to_string(line_no) + " (" + key + ")";
    if (value.empty()) throw ParseError(where + ": empty value");
    seen[key] = true;

    if (key == "geometry.L0") cfg.geometry.L0 = parse_double_or_throw(value, where);
    else if (key == "geometry.L1") cfg.geometry.L1 = parse_double_or_throw(value, where);
    else if (key == "geometry.L2") cfg.geometry.L2 = parse_double_or_throw(value, where);
    else if (key == "geometry.L3") cfg.geometry.L3 = parse_double_or_throw(value, where);
    else if (key == "geometry.L4") cfg.geometry.L4 = parse_double_or_throw(value, where);
    else if (key == "geometry.theta_min")
      cfg.geometry.theta_min = parse_double_or_throw(value, where);
    else if (key == "geometry.theta_max")
      cfg.geometry.theta_max = parse_double_or_throw(value, where);
    else if (key == "decomp.max_depth")
      cfg.decomp.max_depth = static_cast<int>(parse_int_or_throw(value, where));
    else if (key == "decomp.samples_per_axis")
      cfg.decomp.samples_per_axis = static_cast<int>(parse_int_or_throw(value, where));
    else if (key == "decomp.kappa_a")
      cfg.decomp.kappa_a = parse_double_or_throw(value, where);
    else if (key == "decomp.kappa_b")
      cfg.decomp.kappa_b = parse_double_or_throw(value, where);
    else if (key == "decomp.leaf_budget")
      cfg.decomp.leaf_budget = parse_int_or_throw(value, where);
    else if (key == "decomp.root_box") {
      auto toks = split_ws(value);
      if (toks.size() != 4)
        throw ParseError(where + ": expected xmin ymin xmax ymax");
      cfg.decomp.root_box.lo = {parse_double_or_throw(toks[0], where),
                                parse_double_or_throw(toks[1], where)};
      cfg.decomp.root_box.hi = {parse_double_or_throw(toks[2], where),
                                parse_double_or_throw(toks[3], where)};
    } else if (key == "render.width")
      cfg.render.width = static_cast<int>(parse_int_or_throw(value, where));
    else if (key == "render.height")
      cfg.render.height = static_cast<int>(parse_int_or_throw(value, where));
    else if (key == "render.palette")
      cfg.render.palette = std::string(value);
    else if (key.starts_with("task.pp.")) {
      std::string name = key.substr(8);
      if (name.empty()) throw ParseError(where + ": task needs a name");
      find_or_add(cfg.pp_tasks, name)->points = parse_point_list(value, where);
    } else if (key.starts_with("task.ct.") && key.ends_with(".step")) {
      std::string name = key.substr(8, key.size() - 8 - 5);
      if (name.empty()) throw ParseError(where + ": task needs a name");
      find_or_add(cfg.ct_tasks, name)->step = parse_double_or_throw(value, where);
    } else if (key.starts_with("task.ct.")) {
      std::string name = key.substr(8);
      if (name.empty()) throw ParseError(where + ": task needs a name");
      find_or_add(cfg.ct_tasks, name)->points = parse_point_list(value, where);
    } else {
      throw ParseError("line " + std::to_string(line_no) + ": unknown key '" + key +
                       "'");
    }
  }

  for (const char* k :
       {"geometry.L0", "geometry.L1", "geometry.L2", "geometry.L3", "geometry.L4"})
    if (!seen.count(k))
      throw ValidationError(std::string("geometry: missing length ") + k);
  for (const char* k : {"geometry.theta_min", "geometry.theta_max"})
    if (!seen.count(k))
      throw ValidationError(std::string("geometry: missing limit ") + k);

  cfg.geometry.validate();
  cfg.decomp.validate();
  cfg.render.validate();
  for (const auto& t : cfg.pp_tasks)
    if (t.points.empty())
      throw ValidationError("task.pp." + t.name + ": needs at least one waypoint");
  for (const auto& t : cfg.ct_tasks) {
    if (t.points.size() < 2)
      throw ValidationError("task.ct." + t.name + ": needs at least two vertices");
    if (t.step < 0.0)
      throw ValidationError("task.ct." + t.name + ": step must be positive");
  }
  auto by_name = [](const TaskSpec& a, const TaskSpec& b) { return a.name < b.name; };
  std::sort(cfg.pp_tasks.begin(), cfg.pp_tasks.end(), by_name);
  std::sort(cfg.ct_tasks.begin(), cfg.ct_tasks.end(), by_name);
  return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
  std::string s;
  auto kv = [&s](const std::string& k, const std::string& v) {
    s += k;
    s += " = ";
    s += v;
    s += "\n";
  };
  kv("geometry.L0", fmt_double(cfg.geometry.L0));
  kv("geometry.L1", fmt_double(cfg.geometry.L1));
  kv("geometry.L2", fmt_double(cfg.geometry.L2));
  kv("geometry.L3", fmt_double(cfg.geometry.L3));
  kv("geometry.L4", fmt_double(cfg.geometry.L4));
  kv("geometry.theta_min", fmt_double(cfg.geometry.theta_min));
  kv("geometry.theta_max", fmt_double(cfg.geometry.theta_max));
  kv("decomp.max_depth", std::to_string(cfg.decomp.max_depth));
  kv("decomp.samples_per_axis", std::to_string(cfg.decomp.samples_per_axis));
  kv("decomp.kappa_a", fmt_double(cfg.decomp.kappa_a));
  kv("decomp.kappa_b", fmt_double(cfg.decomp.kappa_b));
  kv("decomp.leaf_budget", std::to_string(cfg.decomp.leaf_budget));
  kv("decomp.root_box", fmt_double(cfg.decomp.root_box.lo[0]) + " " +
                            fmt_double(cfg.decomp.root_box.lo[1]) + " " +
                            fmt_double(cfg.decomp.root_box.hi[0]) + " " +
                            fmt_double(cfg.decomp.root_box.hi[1]));
  kv("render.width", std::to_string(cfg.render.width));
  kv("render.height", std::to_string(cfg.render.height));
  kv("render.palette", cfg.render.palette);
  auto points = [](const TaskSpec& t) {
    std::string v;
    for (size_t i = 0; i < t.points.size(); ++i) {
      if (i) v += " ";
      v += fmt_double(t.points[i].x) + " " + fmt_double(t.points[i].y);
    }
    return v;
  };
  for (const auto& t : cfg.pp_tasks) kv("task.pp." + t.name, points(t));
  for (const auto& t : cfg.ct_tasks) {
    kv("task.ct." + t.name, points(t));
    if (t.step > 0.0) kv("task.ct." + t.name + ".step", fmt_double(t.step));
  }
  return s;
}

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.geometry = default_geometry();
  return cfg;
}

TaskFile parse_task_file(const std::string& text) {
  TaskFile tf;
  bool saw_point = false, saw_vertex = false;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("line " + std::to_string(line_no) + ": expected key = value");
    std::string key(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 1));
    std::string where = "line " + std::to_string(line_no) + " (" + key + ")";
    if (key == "point" || key == "vertex") {
      auto toks = split_ws(value);
      if (toks.size() != 2) throw ParseError(where + ": expected x y");
      PlatformConfig p{parse_double_or_throw(toks[0], where),
                       parse_double_or_throw(toks[1], where)};
      if (!std::isfinite(p.x) || !std::isfinite(p.y))
        throw ValidationError(where + ": coordinates must be finite");
      tf.task.points.push_back(p);
      (key == "point" ? saw_point : saw_vertex) = true;
    } else if (key == "step") {
      tf.task.step = parse_double_or_throw(value, where);
    } else {
      throw ParseError("line " + std::to_string(line_no) + ": unknown key '" + key +
                       "'");
    }
  }
  if (saw_point && saw_vertex)
    throw ValidationError("task file mixes point and vertex lines");
  tf.continuous = saw_vertex;
  if (tf.task.points.empty()) throw ValidationError("task file has no points");
  if (tf.continuous && tf.task.points.size() < 2)
    throw ValidationError("a continuous task needs at least two vertices");
  if (tf.task.step < 0.0) throw ValidationError("step must be positive");
  return tf;
}

}  // namespace parakin
