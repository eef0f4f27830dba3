#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "parakin/cell_tree.hpp"

namespace parakin {

// Maximal edge-connected set of Free leaves of one working mode sharing the
// sign of det A: no serial or parallel singularity anywhere inside.
struct Aspect {
  int32_t id = -1;
  WorkingMode mode;
  int sigma = 0;
  std::vector<int32_t> leaves;  // Free leaf ids in that mode's tree

  bool operator==(const Aspect&) const = default;
};

// Aspects merged across crossable serial boundaries: the manipulator can
// move anywhere inside without meeting det A = 0.
struct ReachableRegion {
  int32_t id = -1;
  int sigma = 0;
  std::vector<int32_t> aspects;

  bool operator==(const ReachableRegion&) const = default;
};

// Occupancy bitmap over the finest-level dyadic grid of the root box.
struct Footprint {
  int32_t grid = 0;  // cells per axis, 2^(max_depth - 1)
  std::vector<uint64_t> bits;

  void init(int32_t g) {
    grid = g;
    bits.assign((static_cast<size_t>(g) * g + 63) / 64, 0);
  }
  void set(int64_t x, int64_t y) {
    size_t i = static_cast<size_t>(y) * grid + x;
    bits[i >> 6] |= uint64_t{1} << (i & 63);
  }
  bool get(int64_t x, int64_t y) const {
    if (x < 0 || y < 0 || x >= grid || y >= grid) return false;
    size_t i = static_cast<size_t>(y) * grid + x;
    return (bits[i >> 6] >> (i & 63)) & 1;
  }
  uint64_t count() const;
  void merge(const Footprint& o);
  uint64_t intersect_count(const Footprint& o) const;
  bool contains(const Footprint& o) const;  // o subset of this

  bool operator==(const Footprint&) const = default;
};

enum class RegionKind : uint8_t { TConnected, NConnected };

// Workspace projection of an aspect (T-connected) or of a reachable region
// (N-connected): the union of the member leaves' (x, y) footprints.
struct WorkspaceRegion {
  int32_t id = -1;
  RegionKind kind = RegionKind::TConnected;
  int32_t source_id = -1;                          // aspect or region id
  std::vector<std::pair<int32_t, int32_t>> leaves;  // (mode index, leaf id)
  Footprint footprint;
  uint64_t cells = 0;

  bool operator==(const WorkspaceRegion&) const = default;
};

struct RegionAtlas {
  ManipulatorGeometry geom;
  DecompositionConfig decomp;
  std::array<CellTree<2>, 4> trees;  // one per working mode, mode-index order
  std::vector<Aspect> aspects;
  std::vector<ReachableRegion> regions;
  std::vector<WorkspaceRegion> wt;  // one per aspect, same ids
  std::vector<WorkspaceRegion> wn;  // one per region, same ids
  std::vector<std::string> log;     // deterministic build notes

  // Derived, rebuilt on import: leaf id -> aspect id per mode, -1 if none.
  std::array<std::vector<int32_t>, 4> leaf_aspect;
  // Wall-clock build time; informational only, never serialized.
  double build_seconds = 0.0;

  int32_t grid() const { return 1 << (decomp.max_depth - 1); }
  double cell_area() const {
    double g = static_cast<double>(grid());
    return (decomp.root_box.hi[0] - decomp.root_box.lo[0]) / g *
           ((decomp.root_box.hi[1] - decomp.root_box.lo[1]) / g);
  }
  void rebuild_leaf_aspect();

  bool operator==(const RegionAtlas& o) const {
    return geom == o.geom && decomp == o.decomp && trees == o.trees &&
           aspects == o.aspects && regions == o.regions && wt == o.wt &&
           wn == o.wn && log == o.log;
  }
};

// Caps worker parallelism; reads PARAKIN_THREADS (default: one worker per
// working mode).
int worker_threads();

std::array<CellTree<2>, 4> build_mode_trees(const ManipulatorGeometry& geom,
                                            const DecompositionConfig& cfg);

// Union-find over edge-adjacent Free leaves of equal det A sign, one pass
// per working mode. Components below the pruning size are discarded (and
// reported through `log` when given). Ids are ordered by (mode, lowest leaf).
std::vector<Aspect> compute_aspects(const ManipulatorGeometry& geom,
                                    const DecompositionConfig& cfg,
                                    const std::array<CellTree<2>, 4>& trees,
                                    std::vector<std::string>* log = nullptr);
std::vector<Aspect> compute_aspects(const ManipulatorGeometry& geom,
                                    const DecompositionConfig& cfg);

// True iff the two aspects share det A sign, their modes differ in exactly
// one leg, and their leaf sets approach each other within one leaf diameter
// of that leg's fold locus with det A regular at the merged configuration.
bool serial_adjacent(const Aspect& a, const Aspect& b,
                     const ManipulatorGeometry& geom,
                     const std::array<CellTree<2>, 4>& trees,
                     const DecompositionConfig& cfg);

std::vector<ReachableRegion> compute_reachable_regions(
    const std::vector<Aspect>& aspects, const ManipulatorGeometry& geom,
    const std::array<CellTree<2>, 4>& trees, const DecompositionConfig& cfg,
    std::vector<std::string>* log = nullptr);

WorkspaceRegion project(const Aspect& aspect, const std::array<CellTree<2>, 4>& trees,
                        int max_depth);
WorkspaceRegion project(const ReachableRegion& region, const std::vector<Aspect>& aspects,
                        const std::array<CellTree<2>, 4>& trees, int max_depth);

RegionAtlas build_atlas(const ManipulatorGeometry& geom, const DecompositionConfig& cfg);

struct LocateHit {
  int32_t wt_id = -1;  // equals the aspect id
  WorkingMode mode;
  JointConfig q;
};

struct LocateReport {
  std::vector<LocateHit> t;  // T-connected memberships with joint witnesses
  std::vector<int32_t> n;    // N-connected region ids
  bool empty() const { return t.empty() && n.empty(); }
};

// Membership query. Points inside Free leaves report their aspect(s); a
// point only covered by serial-boundary leaves is still an N-member when
// every flanking aspect belongs to one region (crossing a serial
// singularity is allowed for point-to-point motion).
LocateReport locate(const RegionAtlas& atlas, const PlatformConfig& x);

// True iff some N-connected projection covers, within one cell, every cell
// that is Free in at least one working mode.
bool is_workspace_n_connected(const RegionAtlas& atlas);

// Union of Free leaves over all modes, at finest-grid resolution.
Footprint free_union_footprint(const RegionAtlas& atlas);

}  // namespace parakin
