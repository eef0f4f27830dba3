#include "parakin/region.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cstdlib>
#include <map>
#include <mutex>
#include <set>
#include <thread>

namespace parakin {

uint64_t Footprint::count() const {
  uint64_t n = 0;
  for (uint64_t w : bits) n += std::popcount(w);
  return n;
}

void Footprint::merge(const Footprint& o) {
  for (size_t i = 0; i < bits.size(); ++i) bits[i] |= o.bits[i];
}

uint64_t Footprint::intersect_count(const Footprint& o) const {
  uint64_t n = 0;
  for (size_t i = 0; i < bits.size(); ++i) n += std::popcount(bits[i] & o.bits[i]);
  return n;
}

bool Footprint::contains(const Footprint& o) const {
  for (size_t i = 0; i < bits.size(); ++i)
    if (o.bits[i] & ~bits[i]) return false;
  return true;
}

int worker_threads() {
  int cap = 4;
  if (const char* env = std::getenv("PARAKIN_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v >= 1) cap = static_cast<int>(std::min(v, 64L));
  }
  unsigned hw = std::thread::hardware_concurrency();
  if (hw > 0) cap = std::min(cap, static_cast<int>(hw));
  return std::max(cap, 1);
}

std::array<CellTree<2>, 4> build_mode_trees(const ManipulatorGeometry& geom,
                                            const DecompositionConfig& cfg) {
  std::array<CellTree<2>, 4> trees;
  int threads = std::min(worker_threads(), 4);
  if (threads <= 1) {
    for (int m = 0; m < 4; ++m)
      trees[m] = build_workspace_tree(geom, WorkingMode::from_index(m), cfg);
    return trees;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (int m = next.fetch_add(1); m < 4; m = next.fetch_add(1)) {
      try {
        trees[m] = build_workspace_tree(geom, WorkingMode::from_index(m), cfg);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < threads; ++i) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return trees;
}

namespace {

constexpr int kPruneLeaves = 4;  // speck components below this are dropped

struct UnionFind {
  std::vector<int32_t> parent;
  explicit UnionFind(size_t n) : parent(n) {
    for (size_t i = 0; i < n; ++i) parent[i] = static_cast<int32_t>(i);
  }
  int32_t find(int32_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(int32_t a, int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);  // keep the smallest index as the root
    parent[b] = a;
  }
};

double box_gap(const CellBox<2>& a, const CellBox<2>& b) {
  double dx = std::max({0.0, a.lo[0] - b.hi[0], b.lo[0] - a.hi[0]});
  double dy = std::max({0.0, a.lo[1] - b.hi[1], b.lo[1] - a.hi[1]});
  return std::sqrt(dx * dx + dy * dy);
}

Vec2 box_center(const CellBox<2>& b) {
  return {0.5 * (b.lo[0] + b.hi[0]), 0.5 * (b.lo[1] + b.hi[1])};
}

struct NearLeaf {
  int32_t leaf;
  CellBox<2> box;
  double diam;
};

std::vector<NearLeaf> leaves_near_fold(const Aspect& a, const CellTree<2>& tree,
                                       const ManipulatorGeometry& geom,
                                       const FoldCircle& fc) {
  std::vector<NearLeaf> out;
  for (int32_t li : a.leaves) {
    CellBox<2> box = tree.leaf_box(li);
    double diam = box.diameter();
    if (fold_circle_box_distance(fc, box) > diam) continue;
    if (!fold_arc_in_limits(geom, fc, box)) continue;
    out.push_back({li, box, diam});
  }
  return out;
}

}  // namespace

std::vector<Aspect> compute_aspects(const ManipulatorGeometry& geom,
                                    const DecompositionConfig& cfg,
                                    const std::array<CellTree<2>, 4>& trees,
                                    std::vector<std::string>* log) {
  (void)geom;
  (void)cfg;
  std::vector<Aspect> aspects;
  for (int m = 0; m < 4; ++m) {
    const CellTree<2>& tree = trees[m];
    const size_t n = tree.leaves.size();
    UnionFind uf(n);
    for (size_t li = 0; li < n; ++li) {
      if (tree.leaves[li].label != CellLabel::Free) continue;
      for (int32_t nb : tree.neighbors[li]) {
        if (tree.leaves[nb].label != CellLabel::Free) continue;
        if (tree.leaves[nb].stats.sign_det_a != tree.leaves[li].stats.sign_det_a)
          continue;
        uf.unite(static_cast<int32_t>(li), nb);
      }
    }
    std::map<int32_t, std::vector<int32_t>> comps;
    for (size_t li = 0; li < n; ++li) {
      if (tree.leaves[li].label != CellLabel::Free) continue;
      comps[uf.find(static_cast<int32_t>(li))].push_back(static_cast<int32_t>(li));
    }
    for (auto& [root, members] : comps) {
      if (static_cast<int>(members.size()) < kPruneLeaves) {
        if (log)
          log->push_back("pruned speck component: mode " +
                         WorkingMode::from_index(m).str() + " leaves " +
                         std::to_string(members.size()) + " at leaf " +
                         std::to_string(members.front()));
        continue;
      }
      Aspect a;
      a.mode = WorkingMode::from_index(m);
      a.sigma = tree.leaves[members.front()].stats.sign_det_a;
      a.leaves = members;  // already ascending
      aspects.push_back(std::move(a));
    }
  }
  std::sort(aspects.begin(), aspects.end(), [](const Aspect& a, const Aspect& b) {
    if (a.mode.index() != b.mode.index()) return a.mode.index() < b.mode.index();
    return a.leaves.front() < b.leaves.front();
  });
  for (size_t i = 0; i < aspects.size(); ++i) aspects[i].id = static_cast<int32_t>(i);
  return aspects;
}

std::vector<Aspect> compute_aspects(const ManipulatorGeometry& geom,
                                    const DecompositionConfig& cfg) {
  return compute_aspects(geom, cfg, build_mode_trees(geom, cfg), nullptr);
}

bool serial_adjacent(const Aspect& a, const Aspect& b,
                     const ManipulatorGeometry& geom,
                     const std::array<CellTree<2>, 4>& trees,
                     const DecompositionConfig& cfg) {
  if (a.id == b.id) return false;
  if (a.sigma != b.sigma || a.sigma == 0) return false;
  int differing = (a.mode.gamma1 != b.mode.gamma1 ? 1 : 0) +
                  (a.mode.gamma2 != b.mode.gamma2 ? 1 : 0);
  if (differing != 1) return false;
  int leg = a.mode.gamma1 != b.mode.gamma1 ? 0 : 1;
  int shared_leg = 1 - leg;
  int shared_gamma = a.mode.gamma(shared_leg);

  const CellTree<2>& ta = trees[a.mode.index()];
  const CellTree<2>& tb = trees[b.mode.index()];
  for (const FoldCircle& fc : fold_circles(geom, leg)) {
    auto near_a = leaves_near_fold(a, ta, geom, fc);
    if (near_a.empty()) continue;
    auto near_b = leaves_near_fold(b, tb, geom, fc);
    if (near_b.empty()) continue;
    for (const NearLeaf& la : near_a) {
      for (const NearLeaf& lb : near_b) {
        double reach = std::max(la.diam, lb.diam);
        if (box_gap(la.box, lb.box) > reach) continue;
        // Witness at the fold: project the meeting point onto the circle and
        // require the merged configuration to be regular there.
        Vec2 mid = 0.5 * (box_center(la.box) + box_center(lb.box));
        Vec2 dir = mid - fc.base;
        if (dir.norm() == 0.0) continue;
        Vec2 pt = fc.base + (fc.radius / dir.norm()) * dir;
        double theta_fold = fc.merged_theta(pt);
        if (!angle_in_limits(theta_fold, geom.theta_min, geom.theta_max)) continue;
        LegSolution other = solve_leg(geom, shared_leg, platform(pt));
        if (!other.reachable) continue;
        double theta_other = other.merged(geom.proximal(shared_leg), kTauB)
                                 ? other.theta(+1)
                                 : other.theta(shared_gamma);
        if (!angle_in_limits(theta_other, geom.theta_min, geom.theta_max)) continue;
        JointConfig q;
        q.theta1 = leg == 0 ? theta_fold : theta_other;
        q.theta2 = leg == 0 ? theta_other : theta_fold;
        Vec2 pc = pt - elbow(geom, 0, q.theta1);
        Vec2 pd = pt - elbow(geom, 1, q.theta2);
        double det = cross(pc, pd);
        if (std::abs(det) > cfg.tau_a_cell(reach) && (det > 0) == (a.sigma > 0))
          return true;
      }
    }
  }
  return false;
}

namespace {

// Same-mode components approaching each other near a fold circle; not a
// crossable adjacency, only reported for inspection.
bool same_mode_contact(const Aspect& a, const Aspect& b, const CellTree<2>& tree,
                       const ManipulatorGeometry& geom) {
  for (int leg = 0; leg < 2; ++leg) {
    for (const FoldCircle& fc : fold_circles(geom, leg)) {
      auto near_a = leaves_near_fold(a, tree, geom, fc);
      if (near_a.empty()) continue;
      auto near_b = leaves_near_fold(b, tree, geom, fc);
      if (near_b.empty()) continue;
      for (const NearLeaf& la : near_a)
        for (const NearLeaf& lb : near_b)
          if (box_gap(la.box, lb.box) <= std::max(la.diam, lb.diam)) return true;
    }
  }
  return false;
}

}  // namespace

std::vector<ReachableRegion> compute_reachable_regions(
    const std::vector<Aspect>& aspects, const ManipulatorGeometry& geom,
    const std::array<CellTree<2>, 4>& trees, const DecompositionConfig& cfg,
    std::vector<std::string>* log) {
  const size_t n = aspects.size();
  UnionFind uf(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if (serial_adjacent(aspects[i], aspects[j], geom, trees, cfg))
        uf.unite(static_cast<int32_t>(i), static_cast<int32_t>(j));
      else if (log && aspects[i].mode == aspects[j].mode &&
               aspects[i].sigma == aspects[j].sigma &&
               same_mode_contact(aspects[i], aspects[j],
                                 trees[aspects[i].mode.index()], geom))
        log->push_back("same-mode contact: aspects " + std::to_string(aspects[i].id) +
                       " and " + std::to_string(aspects[j].id) + " (mode " +
                       aspects[i].mode.str() + ")");
    }
  }
  std::map<int32_t, ReachableRegion> comps;
  for (size_t i = 0; i < n; ++i) {
    ReachableRegion& r = comps[uf.find(static_cast<int32_t>(i))];
    r.aspects.push_back(aspects[i].id);
    r.sigma = aspects[i].sigma;
  }
  std::vector<ReachableRegion> regions;
  for (auto& [root, r] : comps) regions.push_back(std::move(r));
  std::sort(regions.begin(), regions.end(),
            [](const ReachableRegion& a, const ReachableRegion& b) {
              if (a.sigma != b.sigma) return a.sigma > b.sigma;
              return a.aspects.front() < b.aspects.front();
            });
  for (size_t i = 0; i < regions.size(); ++i) regions[i].id = static_cast<int32_t>(i);
  return regions;
}

namespace {

void stamp_leaf(Footprint& fp, const CellTree<2>& tree, int32_t leaf) {
  auto [x0, xc] = tree.leaf_span(leaf, 0);
  auto [y0, yc] = tree.leaf_span(leaf, 1);
  for (uint64_t y = y0; y < y0 + yc; ++y)
    for (uint64_t x = x0; x < x0 + xc; ++x)
      fp.set(static_cast<int64_t>(x), static_cast<int64_t>(y));
}

}  // namespace

WorkspaceRegion project(const Aspect& aspect, const std::array<CellTree<2>, 4>& trees,
                        int max_depth) {
  WorkspaceRegion w;
  w.id = aspect.id;
  w.kind = RegionKind::TConnected;
  w.source_id = aspect.id;
  w.footprint.init(1 << (max_depth - 1));
  const CellTree<2>& tree = trees[aspect.mode.index()];
  for (int32_t li : aspect.leaves) {
    w.leaves.emplace_back(aspect.mode.index(), li);
    stamp_leaf(w.footprint, tree, li);
  }
  w.cells = w.footprint.count();
  return w;
}

WorkspaceRegion project(const ReachableRegion& region, const std::vector<Aspect>& aspects,
                        const std::array<CellTree<2>, 4>& trees, int max_depth) {
  WorkspaceRegion w;
  w.id = region.id;
  w.kind = RegionKind::NConnected;
  w.source_id = region.id;
  w.footprint.init(1 << (max_depth - 1));
  for (int32_t ai : region.aspects) {
    const Aspect& a = aspects[ai];
    const CellTree<2>& tree = trees[a.mode.index()];
    for (int32_t li : a.leaves) {
      w.leaves.emplace_back(a.mode.index(), li);
      stamp_leaf(w.footprint, tree, li);
    }
  }
  std::sort(w.leaves.begin(), w.leaves.end());
  w.cells = w.footprint.count();
  return w;
}

void RegionAtlas::rebuild_leaf_aspect() {
  for (int m = 0; m < 4; ++m)
    leaf_aspect[m].assign(trees[m].leaves.size(), -1);
  for (const Aspect& a : aspects)
    for (int32_t li : a.leaves) leaf_aspect[a.mode.index()][li] = a.id;
}

RegionAtlas build_atlas(const ManipulatorGeometry& geom, const DecompositionConfig& cfg) {
  geom.validate();
  cfg.validate();
  auto t0 = std::chrono::steady_clock::now();
  RegionAtlas atlas;
  atlas.geom = geom;
  atlas.decomp = cfg;
  atlas.trees = build_mode_trees(geom, cfg);
  atlas.aspects = compute_aspects(geom, cfg, atlas.trees, &atlas.log);
  atlas.regions =
      compute_reachable_regions(atlas.aspects, geom, atlas.trees, cfg, &atlas.log);
  for (const Aspect& a : atlas.aspects)
    atlas.wt.push_back(project(a, atlas.trees, cfg.max_depth));
  for (const ReachableRegion& r : atlas.regions)
    atlas.wn.push_back(project(r, atlas.aspects, atlas.trees, cfg.max_depth));
  atlas.rebuild_leaf_aspect();
  atlas.build_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return atlas;
}

LocateReport locate(const RegionAtlas& atlas, const PlatformConfig& x) {
  LocateReport rep;
  std::array<double, 2> p{x.x, x.y};
  std::set<int32_t> n_ids;
  for (int m = 0; m < 4; ++m) {
    int32_t li = atlas.trees[m].leaf_at(p);
    if (li < 0 || atlas.trees[m].leaves[li].label != CellLabel::Free) continue;
    int32_t aid = atlas.leaf_aspect[m][li];
    if (aid < 0) continue;  // pruned speck
    auto sol = inverse_kinematics_branch(atlas.geom, x, WorkingMode::from_index(m));
    if (!sol) continue;
    rep.t.push_back({aid, WorkingMode::from_index(m), sol->q});
    for (const ReachableRegion& r : atlas.regions)
      if (std::find(r.aspects.begin(), r.aspects.end(), aid) != r.aspects.end())
        n_ids.insert(r.id);
  }
  if (rep.t.empty()) {
    // Serial-boundary band: N-membership holds when every flanking aspect
    // (across all modes) lies in one region.
    std::set<int32_t> flanking;
    for (int m = 0; m < 4; ++m) {
      int32_t li = atlas.trees[m].leaf_at(p);
      if (li < 0 || atlas.trees[m].leaves[li].label != CellLabel::SerialBoundary)
        continue;
      for (int32_t nb : atlas.trees[m].neighbors[li]) {
        if (atlas.trees[m].leaves[nb].label != CellLabel::Free) continue;
        int32_t aid = atlas.leaf_aspect[m][nb];
        if (aid >= 0) flanking.insert(aid);
      }
    }
    if (!flanking.empty()) {
      std::set<int32_t> regions;
      for (int32_t aid : flanking)
        for (const ReachableRegion& r : atlas.regions)
          if (std::find(r.aspects.begin(), r.aspects.end(), aid) != r.aspects.end())
            regions.insert(r.id);
      if (regions.size() == 1) n_ids.insert(*regions.begin());
    }
  }
  rep.n.assign(n_ids.begin(), n_ids.end());
  return rep;
}

Footprint free_union_footprint(const RegionAtlas& atlas) {
  Footprint fp;
  fp.init(atlas.grid());
  for (int m = 0; m < 4; ++m) {
    const CellTree<2>& tree = atlas.trees[m];
    for (size_t li = 0; li < tree.leaves.size(); ++li)
      if (tree.leaves[li].label == CellLabel::Free)
        stamp_leaf(fp, tree, static_cast<int32_t>(li));
  }
  return fp;
}

bool is_workspace_n_connected(const RegionAtlas& atlas) {
  Footprint u = free_union_footprint(atlas);
  if (u.count() == 0) return false;
  for (const WorkspaceRegion& w : atlas.wn) {
    bool covers = true;
    for (int64_t y = 0; y < u.grid && covers; ++y) {
      for (int64_t x = 0; x < u.grid && covers; ++x) {
        if (!u.get(x, y)) continue;
        if (w.footprint.get(x, y) || w.footprint.get(x - 1, y) ||
            w.footprint.get(x + 1, y) || w.footprint.get(x, y - 1) ||
            w.footprint.get(x, y + 1))
          continue;
        covers = false;
      }
    }
    if (covers) return true;
  }
  return false;
}

}  // namespace parakin
