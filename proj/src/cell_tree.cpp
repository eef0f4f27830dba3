#include "parakin/cell_tree.hpp"

#include <algorithm>
#include <map>

namespace parakin {

const char* to_string(CellLabel label) {
  switch (label) {
    case CellLabel::Outside: return "outside";
    case CellLabel::Free: return "free";
    case CellLabel::SerialBoundary: return "serial";
    case CellLabel::ParallelBoundary: return "parallel";
    case CellLabel::MixedBoundary: return "mixed";
  }
  return "?";
}

template <int K>
int32_t CellTree<K>::leaf_at(const std::array<double, K>& p) const {
  for (int i = 0; i < K; ++i)
    if (p[i] < root_box.lo[i] || p[i] > root_box.hi[i]) return -1;
  int32_t ni = 0;
  while (nodes[ni].first_child >= 0) {
    const Node& n = nodes[ni];
    int child = 0;
    for (int i = 0; i < K; ++i) {
      double mid = bound(i, 2 * n.coord[i] + 1, n.depth + 1);
      if (p[i] >= mid) child |= 1 << i;
    }
    ni = nodes[ni].first_child + child;
  }
  return nodes[ni].leaf;
}

namespace {

template <int K>
struct Builder {
  const DecompositionConfig& cfg;
  const CellClassifier<K>& classify;
  CellTree<K>& tree;
  int forced_depth;
  int64_t leaf_count = 0;

  int32_t make_node(const typename CellTree<K>::Coord& coord, int depth) {
    typename CellTree<K>::Node n;
    n.coord = coord;
    n.depth = static_cast<uint8_t>(depth);
    tree.nodes.push_back(n);
    return static_cast<int32_t>(tree.nodes.size() - 1);
  }

  void emit_leaf(int32_t node_id, CellLabel label, const ProbeSummary& stats) {
    if (++leaf_count > cfg.leaf_budget)
      throw LeafBudgetExceeded("cell tree leaf budget exceeded");
    typename CellTree<K>::Leaf l;
    l.coord = tree.nodes[node_id].coord;
    l.depth = tree.nodes[node_id].depth;
    l.label = label;
    l.stats = stats;
    tree.leaves.push_back(l);
    tree.nodes[node_id].leaf = static_cast<int32_t>(tree.leaves.size() - 1);
  }

  void subdivide(int32_t node_id) {
    auto coord = tree.nodes[node_id].coord;
    int depth = tree.nodes[node_id].depth;
    int32_t first = -1;
    std::array<int32_t, CellTree<K>::kChildren> ids{};
    for (int c = 0; c < CellTree<K>::kChildren; ++c) {
      typename CellTree<K>::Coord cc;
      for (int i = 0; i < K; ++i) cc[i] = 2 * coord[i] + ((c >> i) & 1);
      ids[c] = make_node(cc, depth + 1);
      if (c == 0) first = ids[c];
    }
    tree.nodes[node_id].first_child = first;
    for (int c = 0; c < CellTree<K>::kChildren; ++c) visit(ids[c]);
  }

  void visit(int32_t node_id) {
    int depth = tree.nodes[node_id].depth;
    if (depth < forced_depth) {
      subdivide(node_id);
      return;
    }
    bool final_level = depth == cfg.max_depth;
    ClassifyResult r =
        classify(tree.box_of(tree.nodes[node_id].coord, depth), depth, final_level);
    if (r.label == CellLabel::MixedBoundary && !final_level) {
      subdivide(node_id);
      return;
    }
    emit_leaf(node_id, r.label, r.stats);
  }
};

}  // namespace

template <int K>
CellTree<K> build_tree(const CellBox<K>& root_box, const DecompositionConfig& cfg,
                       const CellClassifier<K>& classify) {
  if (!root_box.valid()) throw ValidationError("build_tree: invalid root box");
  cfg.validate();
  CellTree<K> tree;
  tree.root_box = root_box;
  tree.max_depth = cfg.max_depth;
  Builder<K> b{cfg, classify, tree, std::min(cfg.min_depth, cfg.max_depth)};
  typename CellTree<K>::Coord origin{};
  b.visit(b.make_node(origin, 1));
  tree.build_neighbors();
  return tree;
}

template <int K>
CellTree<K> tree_from_leaves(const CellBox<K>& root_box, int max_depth,
                             std::vector<typename CellTree<K>::Leaf> leaves) {
  if (!root_box.valid()) throw CorruptAtlas("tree: invalid root box");
  CellTree<K> tree;
  tree.root_box = root_box;
  tree.max_depth = max_depth;
  tree.leaves = std::move(leaves);

  for (const auto& l : tree.leaves) {
    if (l.depth < 1 || l.depth > max_depth)
      throw CorruptAtlas("tree: leaf depth out of range");
    for (int i = 0; i < K; ++i)
      if (l.coord[i] >= (1u << (l.depth - 1)))
        throw CorruptAtlas("tree: leaf coordinate out of range");
  }

  // Rebuild topology by walking the DFS order the builder emits.
  size_t cursor = 0;
  struct Rec {
    CellTree<K>& t;
    size_t& cur;
    int max_depth;
    int32_t operator()(const typename CellTree<K>::Coord& coord, int depth) {
      typename CellTree<K>::Node n;
      n.coord = coord;
      n.depth = static_cast<uint8_t>(depth);
      t.nodes.push_back(n);
      int32_t id = static_cast<int32_t>(t.nodes.size() - 1);
      if (cur < t.leaves.size() && t.leaves[cur].depth == depth &&
          t.leaves[cur].coord == coord) {
        t.nodes[id].leaf = static_cast<int32_t>(cur++);
        return id;
      }
      if (depth >= max_depth) throw CorruptAtlas("tree: leaves do not tile the root box");
      std::array<int32_t, CellTree<K>::kChildren> ids{};
      for (int c = 0; c < CellTree<K>::kChildren; ++c) {
        typename CellTree<K>::Coord cc;
        for (int i = 0; i < K; ++i) cc[i] = 2 * coord[i] + ((c >> i) & 1);
        ids[c] = (*this)(cc, depth + 1);
      }
      // Children were appended depth-first; record the first one.
      t.nodes[id].first_child = ids[0];
      return id;
    }
  };
  Rec rec{tree, cursor, max_depth};
  typename CellTree<K>::Coord origin{};
  rec(origin, 1);
  if (cursor != tree.leaves.size())
    throw CorruptAtlas("tree: leaves do not tile the root box");
  tree.build_neighbors();
  return tree;
}

template <int K>
void CellTree<K>::build_neighbors() {
  neighbors.assign(leaves.size(), {});

  struct Face {
    uint64_t plane;                       // position on `axis` in finest units
    std::array<uint64_t, K> lo{}, hi{};   // leaf extent in finest units
    int32_t leaf;
    bool high_side;
  };
  // For each axis, match high faces of one leaf against low faces of another
  // on the same plane; overlap on every remaining axis must have positive
  // measure (corner contact does not count).
  for (int axis = 0; axis < K; ++axis) {
    std::map<uint64_t, std::pair<std::vector<Face>, std::vector<Face>>> planes;
    for (int32_t li = 0; li < static_cast<int32_t>(leaves.size()); ++li) {
      Face f;
      f.leaf = li;
      for (int i = 0; i < K; ++i) {
        auto [first, count] = leaf_span(li, i);
        f.lo[i] = first;
        f.hi[i] = first + count;
      }
      f.high_side = true;
      f.plane = f.hi[axis];
      planes[f.plane].first.push_back(f);
      f.high_side = false;
      f.plane = f.lo[axis];
      planes[f.plane].second.push_back(f);
    }
    for (auto& [pos, group] : planes) {
      for (const Face& h : group.first) {
        for (const Face& l : group.second) {
          if (h.leaf == l.leaf) continue;
          bool overlap = true;
          for (int i = 0; i < K && overlap; ++i) {
            if (i == axis) continue;
            if (std::max(h.lo[i], l.lo[i]) >= std::min(h.hi[i], l.hi[i]))
              overlap = false;
          }
          if (overlap) {
            neighbors[h.leaf].push_back(l.leaf);
            neighbors[l.leaf].push_back(h.leaf);
          }
        }
      }
    }
  }
  for (auto& list : neighbors) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
}

template struct CellTree<2>;
template struct CellTree<3>;
template CellTree<2> build_tree<2>(const CellBox<2>&, const DecompositionConfig&,
                                   const CellClassifier<2>&);
template CellTree<3> build_tree<3>(const CellBox<3>&, const DecompositionConfig&,
                                   const CellClassifier<3>&);
template CellTree<2> tree_from_leaves<2>(const CellBox<2>&, int,
                                         std::vector<CellTree<2>::Leaf>);
template CellTree<3> tree_from_leaves<3>(const CellBox<3>&, int,
                                         std::vector<CellTree<3>::Leaf>);

namespace {

// Distance range from a point to an axis-aligned box.
void box_radius_range(const Vec2& p, const CellBox<2>& box, double& rmin, double& rmax) {
  double dx = std::max({box.lo[0] - p.x, 0.0, p.x - box.hi[0]});
  double dy = std::max({box.lo[1] - p.y, 0.0, p.y - box.hi[1]});
  rmin = std::sqrt(dx * dx + dy * dy);
  rmax = 0.0;
  for (int cx = 0; cx < 2; ++cx)
    for (int cy = 0; cy < 2; ++cy) {
      Vec2 c{cx ? box.hi[0] : box.lo[0], cy ? box.hi[1] : box.lo[1]};
      rmax = std::max(rmax, (c - p).norm());
    }
}

bool arc_meets_limits(double arc_lo, double arc_hi, double lo, double hi) {
  for (int k = -2; k <= 2; ++k) {
    double a = lo + 2.0 * M_PI * k;
    double b = hi + 2.0 * M_PI * k;
    if (std::max(arc_lo, a) <= std::min(arc_hi, b)) return true;
  }
  return false;
}

// Direction arc subtended by the box as seen from p (p outside the box):
// the minimal arc containing the corner directions, always shorter than pi
// for a convex set not containing p.
void box_direction_arc(const Vec2& p, const CellBox<2>& box, double& arc_lo,
                       double& arc_hi) {
  double base = 0.0, mn = 0.0, mx = 0.0;
  bool first = true;
  for (int cx = 0; cx < 2; ++cx)
    for (int cy = 0; cy < 2; ++cy) {
      Vec2 c{cx ? box.hi[0] : box.lo[0], cy ? box.hi[1] : box.lo[1]};
      double a = std::atan2(c.y - p.y, c.x - p.x);
      if (first) {
        base = a;
        first = false;
      } else {
        double off = canonical_angle(a - base);
        mn = std::min(mn, off);
        mx = std::max(mx, off);
      }
    }
  arc_lo = base + mn;
  arc_hi = base + mx;
}

}  // namespace

double fold_circle_box_distance(const FoldCircle& fc, const CellBox<2>& box) {
  double rmin, rmax;
  box_radius_range(fc.base, box, rmin, rmax);
  if (fc.radius < rmin) return rmin - fc.radius;
  if (fc.radius > rmax) return fc.radius - rmax;
  return 0.0;
}

bool fold_arc_in_limits(const ManipulatorGeometry& geom, const FoldCircle& fc,
                        const CellBox<2>& box) {
  bool base_inside = fc.base.x >= box.lo[0] && fc.base.x <= box.hi[0] &&
                     fc.base.y >= box.lo[1] && fc.base.y <= box.hi[1];
  if (base_inside) return true;
  double arc_lo, arc_hi;
  box_direction_arc(fc.base, box, arc_lo, arc_hi);
  if (fc.radius_sign_flipped) {
    arc_lo += M_PI;
    arc_hi += M_PI;
  }
  return arc_meets_limits(arc_lo, arc_hi, geom.theta_min, geom.theta_max);
}

// Exact test: the leg's serial locus (fold circle) may cross the box at a
// point whose merged actuated angle is admissible, while the other leg can
// reach into the box at all. Keeps serial bands out of Free/Outside cells
// no matter where the probes land.
static bool fold_straddles_box(const ManipulatorGeometry& geom, const FoldCircle& fc,
                               const CellBox<2>& box) {
  if (fold_circle_box_distance(fc, box) > 0.0) return false;

  int other = 1 - fc.leg;
  double ro_min, ro_max;
  box_radius_range(geom.base(other), box, ro_min, ro_max);
  if (ro_min > geom.proximal(other) + geom.distal(other)) return false;
  if (ro_max < std::abs(geom.proximal(other) - geom.distal(other))) return false;

  return fold_arc_in_limits(geom, fc, box);
}

ClassifyResult classify_cell(const ManipulatorGeometry& geom, WorkingMode mode,
                             const CellBox<2>& box, const DecompositionConfig& cfg,
                             bool final_level) {
  const int s = cfg.samples_per_axis;
  const double diam = box.diameter();
  const double tau_a = cfg.tau_a_cell(diam);
  const double tau_b = cfg.tau_b_cell(diam);

  ProbeSummary st;
  st.total_probes = s * s;
  bool a_failed = false, b_failed = false;
  for (int j = 0; j < s; ++j) {
    for (int i = 0; i < s; ++i) {
      PlatformConfig x{box.lo[0] + (box.hi[0] - box.lo[0]) * i / (s - 1),
                       box.lo[1] + (box.hi[1] - box.lo[1]) * j / (s - 1)};
      auto sol = inverse_kinematics_branch(geom, x, mode);
      if (!sol) continue;
      KinematicMatrices m = jacobians(geom, x, sol->q);
      if (st.branch_probes == 0) {
        st.min_det_a = st.max_det_a = m.det_a;
        st.min_b11 = st.max_b11 = m.b11;
        st.min_b22 = st.max_b22 = m.b22;
      } else {
        st.min_det_a = std::min(st.min_det_a, m.det_a);
        st.max_det_a = std::max(st.max_det_a, m.det_a);
        st.min_b11 = std::min(st.min_b11, m.b11);
        st.max_b11 = std::max(st.max_b11, m.b11);
        st.min_b22 = std::min(st.min_b22, m.b22);
        st.max_b22 = std::max(st.max_b22, m.b22);
      }
      ++st.branch_probes;
      if (std::abs(m.det_a) <= tau_a) a_failed = true;
      if (std::min(std::abs(m.b11), std::abs(m.b22)) <= tau_b) b_failed = true;
    }
  }
  if (st.branch_probes > 0) {
    if (st.min_det_a > 0.0)
      st.sign_det_a = +1;
    else if (st.max_det_a < 0.0)
      st.sign_det_a = -1;
    else
      a_failed = true;  // sign change (or an exact zero) across probes
  }

  for (int leg = 0; leg < 2; ++leg)
    for (const FoldCircle& fc : fold_circles(geom, leg))
      if (fold_straddles_box(geom, fc, box)) {
        st.fold_straddle[leg] = 1;
        b_failed = true;
      }

  ClassifyResult res;
  res.stats = st;
  bool avail_failed = st.branch_probes < st.total_probes;
  if (st.branch_probes == 0 && !st.fold_straddle[0] && !st.fold_straddle[1]) {
    res.label = CellLabel::Outside;
    return res;
  }
  if (!avail_failed && !a_failed && !b_failed) {
    res.label = CellLabel::Free;
    return res;
  }
  if (!final_level) {
    res.label = CellLabel::MixedBoundary;
    return res;
  }
  if (b_failed && !a_failed && !avail_failed)
    res.label = CellLabel::SerialBoundary;
  else if (a_failed && !b_failed && !avail_failed)
    res.label = CellLabel::ParallelBoundary;
  else
    res.label = CellLabel::MixedBoundary;
  return res;
}

CellTree<2> build_workspace_tree(const ManipulatorGeometry& geom, WorkingMode mode,
                                 const DecompositionConfig& cfg) {
  geom.validate();
  CellClassifier<2> cls = [&geom, mode, &cfg](const CellBox<2>& box, int /*depth*/,
                                              bool final_level) {
    return classify_cell(geom, mode, box, cfg, final_level);
  };
  return build_tree<2>(cfg.root_box, cfg, cls);
}

}  // namespace parakin
