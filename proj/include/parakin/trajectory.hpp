#pragma once

#include <vector>

#include "parakin/region.hpp"

namespace parakin {

// Ordered set of configurations to visit; no path is prescribed between
// them. Serial singularities may be crossed in between, det A = 0 may not.
struct PointToPointTask {
  std::vector<PlatformConfig> waypoints;  // p >= 1
};

// Piecewise-linear parametric path; the caller pre-samples any smoother
// curve into a polyline.
struct ContinuousTask {
  std::vector<PlatformConfig> vertices;  // >= 2, finite coordinates
};

enum class FailureReason { OutsideWorkspace, NoCommonRegion, NoCoveringAspect };

const char* to_string(FailureReason r);

struct WitnessStep {
  double lambda = 0.0;  // arc-length parameter in [0, 1]
  PlatformConfig x;
  WorkingMode mode;
  JointConfig q;
};

struct FeasibilityReport {
  bool feasible = false;
  int32_t region_id = -1;  // point-to-point witness: reachable region
  int32_t aspect_id = -1;  // continuous witness: covering aspect
  std::vector<WitnessStep> witness;
  FailureReason reason = FailureReason::OutsideWorkspace;
  int32_t failing_index = -1;    // offending waypoint (point-to-point)
  double failing_lambda = -1.0;  // offending parameter (continuous)
};

// Feasible iff one reachable region admits every waypoint. The witness picks,
// per waypoint, the admissible branch closest in joint space to the previous
// pick (first waypoint: lowest mode).
FeasibilityReport check_point_to_point(const RegionAtlas& atlas,
                                       const PointToPointTask& task);

// Samples the polyline at arc-length intervals <= step (vertices always
// included); feasible iff a single aspect's projection contains every
// sample. The witness lifts the samples through that aspect's branch.
FeasibilityReport check_continuous(const RegionAtlas& atlas, const ContinuousTask& task,
                                   double step);

// Half the finest leaf diameter of the atlas.
double default_step(const RegionAtlas& atlas);

// Joint path of a curve through one aspect's branch. Throws LiftBroken when
// a sample loses the branch (atlas/step inconsistency).
std::vector<WitnessStep> lift_continuous(const RegionAtlas& atlas,
                                         const ContinuousTask& task, int32_t aspect_id,
                                         double step);

// Arc-length sampling of a polyline; exposed for tests and the witness path.
std::vector<std::pair<double, PlatformConfig>> sample_polyline(
    const std::vector<PlatformConfig>& vertices, double step);

}  // namespace parakin
