#include "parakin/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace parakin {

const char* to_string(FailureReason r) {
  switch (r) {
    case FailureReason::OutsideWorkspace: return "outside-workspace";
    case FailureReason::NoCommonRegion: return "no-common-region";
    case FailureReason::NoCoveringAspect: return "no-covering-aspect";
  }
  return "?";
}

std::vector<std::pair<double, PlatformConfig>> sample_polyline(
    const std::vector<PlatformConfig>& vertices, double step) {
  std::vector<std::pair<double, PlatformConfig>> out;
  if (vertices.empty()) return out;
  double total = 0.0;
  for (size_t i = 1; i < vertices.size(); ++i)
    total += (vec(vertices[i]) - vec(vertices[i - 1])).norm();
  if (total == 0.0) {
    // Degenerate curve: keep the vertices, index-parameterized.
    for (size_t i = 0; i < vertices.size(); ++i)
      out.emplace_back(vertices.size() > 1
                           ? static_cast<double>(i) / (vertices.size() - 1)
                           : 0.0,
                       vertices[i]);
    return out;
  }
  double walked = 0.0;
  out.emplace_back(0.0, vertices.front());
  for (size_t i = 1; i < vertices.size(); ++i) {
    Vec2 a = vec(vertices[i - 1]);
    Vec2 b = vec(vertices[i]);
    double len = (b - a).norm();
    if (len > 0.0) {
      int pieces = std::max(1, static_cast<int>(std::ceil(len / step)));
      for (int k = 1; k <= pieces; ++k) {
        double t = static_cast<double>(k) / pieces;
        Vec2 p = a + t * (b - a);
        out.emplace_back((walked + t * len) / total, platform(p));
      }
    } else {
      out.emplace_back(walked / total, vertices[i]);
    }
    walked += len;
  }
  return out;
}

double default_step(const RegionAtlas& atlas) {
  const CellBox<2>& rb = atlas.decomp.root_box;
  double g = static_cast<double>(atlas.grid());
  double w = (rb.hi[0] - rb.lo[0]) / g;
  double h = (rb.hi[1] - rb.lo[1]) / g;
  return 0.5 * std::sqrt(w * w + h * h);
}

namespace {

int32_t region_of_aspect(const RegionAtlas& atlas, int32_t aspect_id) {
  for (const ReachableRegion& r : atlas.regions)
    if (std::find(r.aspects.begin(), r.aspects.end(), aspect_id) != r.aspects.end())
      return r.id;
  return -1;
}

double joint_distance(const JointConfig& a, const JointConfig& b) {
  double d1 = canonical_angle(a.theta1 - b.theta1);
  double d2 = canonical_angle(a.theta2 - b.theta2);
  return std::sqrt(d1 * d1 + d2 * d2);
}

}  // namespace

FeasibilityReport check_point_to_point(const RegionAtlas& atlas,
                                       const PointToPointTask& task) {
  FeasibilityReport rep;
  if (task.waypoints.empty()) {
    rep.reason = FailureReason::OutsideWorkspace;
    rep.failing_index = 0;
    return rep;
  }

  std::vector<LocateReport> hits;
  std::set<int32_t> live;  // regions admitting every waypoint so far
  for (size_t i = 0; i < task.waypoints.size(); ++i) {
    LocateReport lr = locate(atlas, task.waypoints[i]);
    if (lr.empty()) {
      rep.reason = FailureReason::OutsideWorkspace;
      rep.failing_index = static_cast<int32_t>(i);
      return rep;
    }
    std::set<int32_t> here(lr.n.begin(), lr.n.end());
    if (i == 0) {
      live = here;
    } else {
      std::set<int32_t> kept;
      for (int32_t r : live)
        if (here.count(r)) kept.insert(r);
      live.swap(kept);
    }
    if (live.empty()) {
      rep.reason = FailureReason::NoCommonRegion;
      rep.failing_index = static_cast<int32_t>(i);
      return rep;
    }
    hits.push_back(std::move(lr));
  }

  rep.feasible = true;
  rep.region_id = *live.begin();
  // Witness: per waypoint, admissible branches inside the chosen region,
  // greedily matched to the previous waypoint's joints.
  JointConfig prev;
  bool have_prev = false;
  for (size_t i = 0; i < task.waypoints.size(); ++i) {
    std::vector<LocateHit> options;
    for (const LocateHit& h : hits[i].t)
      if (region_of_aspect(atlas, h.wt_id) == rep.region_id) options.push_back(h);
    if (options.empty()) {
      // Boundary-band waypoint: any existing branch of the region's modes.
      for (const ReachableRegion& r : atlas.regions) {
        if (r.id != rep.region_id) continue;
        std::set<int> mode_ids;
        for (int32_t ai : r.aspects) mode_ids.insert(atlas.aspects[ai].mode.index());
        for (int mi : mode_ids) {
          auto sol = inverse_kinematics_branch(atlas.geom, task.waypoints[i],
                                               WorkingMode::from_index(mi));
          if (sol) options.push_back({-1, sol->mode, sol->q});
        }
      }
    }
    const LocateHit* pick = nullptr;
    double best = 0.0;
    for (const LocateHit& h : options) {
      double d = have_prev ? joint_distance(h.q, prev)
                           : static_cast<double>(h.mode.index());
      if (!pick || d < best) {
        pick = &h;
        best = d;
      }
    }
    WitnessStep ws;
    ws.lambda = task.waypoints.size() > 1
                    ? static_cast<double>(i) / (task.waypoints.size() - 1)
                    : 0.0;
    ws.x = task.waypoints[i];
    if (pick) {
      ws.mode = pick->mode;
      ws.q = pick->q;
      prev = pick->q;
      have_prev = true;
    }
    rep.witness.push_back(ws);
  }
  return rep;
}

FeasibilityReport check_continuous(const RegionAtlas& atlas, const ContinuousTask& task,
                                   double step) {
  FeasibilityReport rep;
  if (step <= 0.0) throw ValidationError("check_continuous: step must be > 0");
  if (task.vertices.size() < 2)
    throw ValidationError("check_continuous: a curve needs at least 2 vertices");

  auto samples = sample_polyline(task.vertices, step);
  std::vector<int32_t> live;  // aspects covering every sample so far
  for (size_t i = 0; i < samples.size(); ++i) {
    const PlatformConfig& x = samples[i].second;
    std::array<double, 2> p{x.x, x.y};
    std::vector<int32_t> here;
    for (int m = 0; m < 4; ++m) {
      int32_t li = atlas.trees[m].leaf_at(p);
      if (li < 0 || atlas.trees[m].leaves[li].label != CellLabel::Free) continue;
      int32_t aid = atlas.leaf_aspect[m][li];
      if (aid >= 0) here.push_back(aid);
    }
    if (i == 0) {
      live = here;
    } else {
      std::vector<int32_t> kept;
      for (int32_t a : live)
        if (std::find(here.begin(), here.end(), a) != here.end()) kept.push_back(a);
      live.swap(kept);
    }
    if (live.empty()) {
      rep.reason = here.empty() && locate(atlas, x).empty()
                       ? FailureReason::OutsideWorkspace
                       : FailureReason::NoCoveringAspect;
      rep.failing_lambda = samples[i].first;
      rep.failing_index = static_cast<int32_t>(i);
      return rep;
    }
  }

  rep.feasible = true;
  rep.aspect_id = *std::min_element(live.begin(), live.end());
  rep.witness = lift_continuous(atlas, task, rep.aspect_id, step);
  return rep;
}

std::vector<WitnessStep> lift_continuous(const RegionAtlas& atlas,
                                         const ContinuousTask& task, int32_t aspect_id,
                                         double step) {
  if (aspect_id < 0 || aspect_id >= static_cast<int32_t>(atlas.aspects.size()))
    throw UnknownRegionId("lift_continuous: no aspect " + std::to_string(aspect_id));
  WorkingMode mode = atlas.aspects[aspect_id].mode;
  std::vector<WitnessStep> path;
  for (const auto& [lambda, x] : sample_polyline(task.vertices, step)) {
    auto sol = inverse_kinematics_branch(atlas.geom, x, mode);
    if (!sol)
      throw LiftBroken("lift_continuous: branch lost at lambda " +
                       std::to_string(lambda));
    path.push_back({lambda, x, mode, sol->q});
  }
  return path;
}

}  // namespace parakin
