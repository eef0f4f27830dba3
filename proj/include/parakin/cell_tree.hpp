#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "parakin/errors.hpp"
#include "parakin/kinematics.hpp"

namespace parakin {

// Axis-aligned box of a 2^K-tree cell.
template <int K>
struct CellBox {
  std::array<double, K> lo{};
  std::array<double, K> hi{};

  bool operator==(const CellBox&) const = default;

  bool valid() const {
    for (int i = 0; i < K; ++i)
      if (!(lo[i] < hi[i])) return false;
    return true;
  }
  double diameter() const {
    double s = 0.0;
    for (int i = 0; i < K; ++i) s += (hi[i] - lo[i]) * (hi[i] - lo[i]);
    return std::sqrt(s);
  }
  double measure() const {
    double m = 1.0;
    for (int i = 0; i < K; ++i) m *= hi[i] - lo[i];
    return m;
  }
};

// Conservative per-cell verdict for one working mode.
enum class CellLabel : uint8_t {
  Outside,           // no IK branch for the mode anywhere in the cell
  Free,              // branch everywhere, det A one sign, no singularity margin hit
  SerialBoundary,    // only the B condition failed at max depth
  ParallelBoundary,  // only the A condition failed at max depth
  MixedBoundary,     // several conditions failed, or still refinable
};

const char* to_string(CellLabel label);

// Per-leaf probe aggregates. Stats cover probes where the branch exists;
// they are zeroed when no probe has one.
struct ProbeSummary {
  int32_t branch_probes = 0;
  int32_t total_probes = 0;
  double min_det_a = 0.0, max_det_a = 0.0;
  double min_b11 = 0.0, max_b11 = 0.0;
  double min_b22 = 0.0, max_b22 = 0.0;
  int32_t sign_det_a = 0;  // common sign over probes, 0 if mixed or none
  // Exact annulus test says the leg's serial locus may cross this cell.
  std::array<uint8_t, 2> fold_straddle{0, 0};

  bool operator==(const ProbeSummary&) const = default;
};

struct ClassifyResult {
  CellLabel label = CellLabel::Outside;
  ProbeSummary stats;
};

struct DecompositionConfig {
  int max_depth = 8;         // root counts as depth 1
  int samples_per_axis = 3;  // probe grid per cell, corners included
  double kappa_a = 0.05;     // tau_a_cell = kappa_a * diam(cell)
  double kappa_b = 0.05;
  int64_t leaf_budget = 1000000;
  // Cells coarser than this are always split; probe grids on very coarse
  // cells are too sparse to trust an Outside/Free verdict.
  int min_depth = 4;
  CellBox<2> root_box{{-13.0, -13.0}, {20.0, 13.0}};

  double tau_a_cell(double diam) const { return kappa_a * diam; }
  double tau_b_cell(double diam) const { return kappa_b * diam; }

  bool operator==(const DecompositionConfig&) const = default;

  void validate() const {
    if (max_depth < 1 || max_depth > 20)
      throw ValidationError("decomp: max_depth must be in [1, 20]");
    if (samples_per_axis < 2)
      throw ValidationError("decomp: samples_per_axis must be >= 2");
    if (!(kappa_a >= 0.0) || !(kappa_b >= 0.0))
      throw ValidationError("decomp: kappa_a/kappa_b must be >= 0");
    if (leaf_budget < 1) throw ValidationError("decomp: leaf_budget must be >= 1");
    if (!root_box.valid()) throw ValidationError("decomp: root_box lo must be < hi");
  }
};

// Adaptive 2^K-tree over a root box. Cells are addressed by (depth, integer
// coordinates): at depth d each axis is split into 2^(d-1) dyadic slots, so
// leaves tile the root exactly in integer arithmetic. Child order is binary
// counting over axes, axis 0 in the lowest bit.
template <int K>
struct CellTree {
  using Coord = std::array<uint32_t, K>;

  struct Node {
    Coord coord{};
    uint8_t depth = 1;
    int32_t first_child = -1;  // 2^K consecutive node indices, -1 for leaves
    int32_t leaf = -1;         // index into leaves when this node is a leaf
  };
  struct Leaf {
    Coord coord{};
    uint8_t depth = 1;
    CellLabel label = CellLabel::Outside;
    ProbeSummary stats;

    bool operator==(const Leaf&) const = default;
  };

  CellBox<K> root_box;
  int max_depth = 1;
  std::vector<Node> nodes;
  std::vector<Leaf> leaves;                   // depth-first order
  std::vector<std::vector<int32_t>> neighbors;  // shared-face adjacency per leaf

  static constexpr int kChildren = 1 << K;

  // Dyadic cell bounds: bound(i, d) = lo + extent * i / 2^(d-1), exact in
  // the dyadic fraction so siblings share faces bit-for-bit.
  double bound(int axis, uint32_t i, int depth) const {
    double frac = static_cast<double>(i) / static_cast<double>(1u << (depth - 1));
    return root_box.lo[axis] + (root_box.hi[axis] - root_box.lo[axis]) * frac;
  }
  CellBox<K> box_of(const Coord& coord, int depth) const {
    CellBox<K> b;
    for (int i = 0; i < K; ++i) {
      b.lo[i] = bound(i, coord[i], depth);
      b.hi[i] = bound(i, coord[i] + 1, depth);
    }
    return b;
  }
  CellBox<K> leaf_box(int32_t leaf_id) const {
    return box_of(leaves[leaf_id].coord, leaves[leaf_id].depth);
  }
  // Number of finest-level cells covered by a leaf, exact.
  uint64_t leaf_cells(int32_t leaf_id) const {
    return uint64_t{1} << (K * (max_depth - leaves[leaf_id].depth));
  }
  // Leaf span on one axis in finest-level units: [first, first + count).
  std::pair<uint64_t, uint64_t> leaf_span(int32_t leaf_id, int axis) const {
    const Leaf& l = leaves[leaf_id];
    uint64_t scale = uint64_t{1} << (max_depth - l.depth);
    return {l.coord[axis] * scale, scale};
  }

  // Leaf containing a point, or -1 outside the root box. Points on internal
  // faces resolve to the upper cell; the root's upper faces stay included.
  int32_t leaf_at(const std::array<double, K>& p) const;

  void build_neighbors();
  std::vector<int32_t> leaf_neighbors(int32_t leaf_id) const {
    return neighbors.at(static_cast<size_t>(leaf_id));
  }

  bool operator==(const CellTree& o) const {
    return root_box.lo == o.root_box.lo && root_box.hi == o.root_box.hi &&
           max_depth == o.max_depth && leaves == o.leaves;
  }
};

// Classifier contract: called once per candidate cell. `final_level` is true
// when the cell cannot be refined further; a MixedBoundary result below the
// final level requests subdivision, and the classifier must resolve the
// label into Serial/Parallel/Mixed at the final level.
template <int K>
using CellClassifier =
    std::function<ClassifyResult(const CellBox<K>& box, int depth, bool final_level)>;

template <int K>
CellTree<K> build_tree(const CellBox<K>& root_box, const DecompositionConfig& cfg,
                       const CellClassifier<K>& classify);

// Reconstructs tree topology from an exactly-tiling leaf list in DFS order.
// Throws CorruptAtlas when the leaves do not tile the root box.
template <int K>
CellTree<K> tree_from_leaves(const CellBox<K>& root_box, int max_depth,
                             std::vector<typename CellTree<K>::Leaf> leaves);

extern template struct CellTree<2>;
extern template struct CellTree<3>;
extern template CellTree<2> build_tree<2>(const CellBox<2>&, const DecompositionConfig&,
                                          const CellClassifier<2>&);
extern template CellTree<3> build_tree<3>(const CellBox<3>&, const DecompositionConfig&,
                                          const CellClassifier<3>&);
extern template CellTree<2> tree_from_leaves<2>(const CellBox<2>&, int,
                                                std::vector<CellTree<2>::Leaf>);
extern template CellTree<3> tree_from_leaves<3>(const CellBox<3>&, int,
                                                std::vector<CellTree<3>::Leaf>);

// Distance from a box to a fold circle locus; 0 when the circle crosses it.
double fold_circle_box_distance(const FoldCircle& fc, const CellBox<2>& box);

// Whether the merged actuated angle over the circle arc subtended by the box
// meets the joint limits.
bool fold_arc_in_limits(const ManipulatorGeometry& geom, const FoldCircle& fc,
                        const CellBox<2>& box);

// Workspace instantiation (K = 2): conservative label of one cell for one
// working mode. Probes an S x S grid, checks branch availability, det A sign
// and margin, |B_jj| margins, and runs the exact fold-circle straddle test
// that pins the serial locus to boundary cells.
ClassifyResult classify_cell(const ManipulatorGeometry& geom, WorkingMode mode,
                             const CellBox<2>& box, const DecompositionConfig& cfg,
                             bool final_level);

// Builds the quadtree for one working mode over cfg.root_box.
CellTree<2> build_workspace_tree(const ManipulatorGeometry& geom, WorkingMode mode,
                                 const DecompositionConfig& cfg);

}  // namespace parakin
