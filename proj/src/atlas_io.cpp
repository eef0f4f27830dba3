#include "parakin/atlas_io.hpp"

#include <sstream>

#include "parakin/text.hpp"

namespace parakin {

namespace {

CellLabel label_from_token(std::string_view tok) {
  if (tok == "outside") return CellLabel::Outside;
  if (tok == "free") return CellLabel::Free;
  if (tok == "serial") return CellLabel::SerialBoundary;
  if (tok == "parallel") return CellLabel::ParallelBoundary;
  if (tok == "mixed") return CellLabel::MixedBoundary;
  throw CorruptAtlas("unknown cell label '" + std::string(tok) + "'");
}

void write_footprint_rows(std::string& out, const Footprint& fp) {
  for (int64_t y = 0; y < fp.grid; ++y) {
    std::string row;
    int64_t x = 0;
    while (x < fp.grid) {
      if (!fp.get(x, y)) {
        ++x;
        continue;
      }
      int64_t x0 = x;
      while (x < fp.grid && fp.get(x, y)) ++x;
      if (!row.empty()) row += " ";
      row += std::to_string(x0) + "-" + std::to_string(x - 1);
    }
    if (!row.empty())
      out += "row = " + std::to_string(y) + " : " + row + "\n";
  }
}

struct LineReader {
  std::istringstream in;
  std::string current;
  bool eof = false;

  explicit LineReader(const std::string& text) : in(text) { advance(); }

  void advance() {
    while (std::getline(in, current)) {
      std::string_view v = trim(current);
      if (!v.empty()) {
        current = std::string(v);
        return;
      }
    }
    eof = true;
    current.clear();
  }
  const std::string& peek() const {
    if (eof) throw CorruptAtlas("atlas truncated");
    return current;
  }
  std::string take() {
    std::string s = peek();
    advance();
    return s;
  }
  bool at_section() const { return !eof && !current.empty() && current[0] == '['; }
};

std::pair<std::string, std::string> split_kv(const std::string& line) {
  auto eq = line.find('=');
  if (eq == std::string::npos)
    throw CorruptAtlas("expected key = value, got '" + line + "'");
  return {std::string(trim(std::string_view(line).substr(0, eq))),
          std::string(trim(std::string_view(line).substr(eq + 1)))};
}

std::string expect_key(LineReader& r, const std::string& key) {
  auto [k, v] = split_kv(r.take());
  if (k != key) throw CorruptAtlas("expected key '" + key + "', got '" + k + "'");
  return v;
}

Footprint read_footprint_rows(LineReader& r, int32_t grid, uint64_t expect_cells) {
  Footprint fp;
  fp.init(grid);
  while (!r.eof && !r.at_section() && r.peek().starts_with("row")) {
    auto [k, v] = split_kv(r.take());
    auto colon = v.find(':');
    if (colon == std::string::npos) throw CorruptAtlas("bad footprint row");
    int64_t y = parse_int_or_throw(trim(std::string_view(v).substr(0, colon)), "row");
    if (y < 0 || y >= grid) throw CorruptAtlas("footprint row out of range");
    for (auto span : split_ws(std::string_view(v).substr(colon + 1))) {
      auto dash = span.find('-');
      if (dash == std::string_view::npos) throw CorruptAtlas("bad footprint span");
      int64_t x0 = parse_int_or_throw(span.substr(0, dash), "row span");
      int64_t x1 = parse_int_or_throw(span.substr(dash + 1), "row span");
      if (x0 < 0 || x1 < x0 || x1 >= grid) throw CorruptAtlas("footprint span range");
      for (int64_t x = x0; x <= x1; ++x) fp.set(x, y);
    }
  }
  if (fp.count() != expect_cells)
    throw CorruptAtlas("footprint cell count mismatch");
  return fp;
}

}  // namespace

std::string export_atlas(const AtlasDocument& doc) {
  const RegionAtlas& atlas = doc.atlas;
  std::string out;
  out += kAtlasVersion;
  out += "\n[config]\n";
  out += serialize_config(doc.config);

  out += "[meta]\n";
  out += "grid = " + std::to_string(atlas.grid()) + "\n";
  out += "min_depth = " + std::to_string(atlas.decomp.min_depth) + "\n";
  out += "aspects = " + std::to_string(atlas.aspects.size()) + "\n";
  out += "regions = " + std::to_string(atlas.regions.size()) + "\n";
  for (const std::string& l : atlas.log) out += "log = " + l + "\n";

  for (int m = 0; m < 4; ++m) {
    const CellTree<2>& tree = atlas.trees[m];
    out += "[tree " + std::to_string(m) + "]\n";
    out += "mode = " + WorkingMode::from_index(m).str() + "\n";
    out += "leaves = " + std::to_string(tree.leaves.size()) + "\n";
    for (const auto& l : tree.leaves) {
      const ProbeSummary& s = l.stats;
      out += "leaf = " + std::to_string(l.depth) + " " + std::to_string(l.coord[0]) +
             " " + std::to_string(l.coord[1]) + " " + to_string(l.label) + " " +
             std::to_string(s.sign_det_a) + " " + std::to_string(s.branch_probes) +
             " " + std::to_string(s.total_probes) + " " + fmt_double(s.min_det_a) +
             " " + fmt_double(s.max_det_a) + " " + fmt_double(s.min_b11) + " " +
             fmt_double(s.max_b11) + " " + fmt_double(s.min_b22) + " " +
             fmt_double(s.max_b22) + " " + std::to_string(s.fold_straddle[0]) + " " +
             std::to_string(s.fold_straddle[1]) + "\n";
    }
  }

  out += "[aspects]\n";
  out += "count = " + std::to_string(atlas.aspects.size()) + "\n";
  for (const Aspect& a : atlas.aspects) {
    out += "aspect = " + std::to_string(a.id) + " " + std::to_string(a.mode.index()) +
           " " + std::to_string(a.sigma) + " " + std::to_string(a.leaves.size()) +
           " :";
    for (int32_t li : a.leaves) out += " " + std::to_string(li);
    out += "\n";
  }

  out += "[regions]\n";
  out += "count = " + std::to_string(atlas.regions.size()) + "\n";
  for (const ReachableRegion& r : atlas.regions) {
    out += "region = " + std::to_string(r.id) + " " + std::to_string(r.sigma) + " " +
           std::to_string(r.aspects.size()) + " :";
    for (int32_t ai : r.aspects) out += " " + std::to_string(ai);
    out += "\n";
  }

  for (const WorkspaceRegion& w : atlas.wt) {
    out += "[wt " + std::to_string(w.id) + "]\n";
    out += "source = " + std::to_string(w.source_id) + "\n";
    out += "cells = " + std::to_string(w.cells) + "\n";
    write_footprint_rows(out, w.footprint);
  }
  for (const WorkspaceRegion& w : atlas.wn) {
    out += "[wn " + std::to_string(w.id) + "]\n";
    out += "source = " + std::to_string(w.source_id) + "\n";
    out += "cells = " + std::to_string(w.cells) + "\n";
    write_footprint_rows(out, w.footprint);
  }
  out += "[end]\n";
  return out;
}

AtlasDocument import_atlas(const std::string& text) {
  LineReader r(text);
  if (r.eof || r.take() != kAtlasVersion)
    throw VersionError("expected header line '" + std::string(kAtlasVersion) + "'");

  AtlasDocument doc;
  if (r.take() != "[config]") throw CorruptAtlas("missing [config] section");
  std::string config_text;
  while (!r.eof && !r.at_section()) config_text += r.take() + "\n";
  try {
    doc.config = parse_config(config_text);
  } catch (const Error& e) {
    throw CorruptAtlas(std::string("config echo: ") + e.what());
  }
  RegionAtlas& atlas = doc.atlas;
  atlas.geom = doc.config.geometry;
  atlas.decomp = doc.config.decomp;

  if (r.take() != "[meta]") throw CorruptAtlas("missing [meta] section");
  int32_t grid = static_cast<int32_t>(parse_int_or_throw(expect_key(r, "grid"), "meta"));
  atlas.decomp.min_depth =
      static_cast<int>(parse_int_or_throw(expect_key(r, "min_depth"), "meta"));
  size_t n_aspects = parse_int_or_throw(expect_key(r, "aspects"), "meta");
  size_t n_regions = parse_int_or_throw(expect_key(r, "regions"), "meta");
  if (grid != (1 << (atlas.decomp.max_depth - 1)))
    throw CorruptAtlas("grid does not match max_depth");
  while (!r.eof && !r.at_section()) {
    auto [k, v] = split_kv(r.take());
    if (k != "log") throw CorruptAtlas("unexpected meta key '" + k + "'");
    atlas.log.push_back(v);
  }

  for (int m = 0; m < 4; ++m) {
    if (r.take() != "[tree " + std::to_string(m) + "]")
      throw CorruptAtlas("missing [tree " + std::to_string(m) + "] section");
    if (expect_key(r, "mode") != WorkingMode::from_index(m).str())
      throw CorruptAtlas("tree mode mismatch");
    size_t n = parse_int_or_throw(expect_key(r, "leaves"), "tree");
    std::vector<CellTree<2>::Leaf> leaves;
    leaves.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      std::string v = expect_key(r, "leaf");
      auto toks = split_ws(v);
      if (toks.size() != 15) throw CorruptAtlas("bad leaf line");
      CellTree<2>::Leaf l;
      l.depth = static_cast<uint8_t>(parse_int_or_throw(toks[0], "leaf"));
      l.coord[0] = static_cast<uint32_t>(parse_int_or_throw(toks[1], "leaf"));
      l.coord[1] = static_cast<uint32_t>(parse_int_or_throw(toks[2], "leaf"));
      l.label = label_from_token(toks[3]);
      l.stats.sign_det_a = static_cast<int32_t>(parse_int_or_throw(toks[4], "leaf"));
      l.stats.branch_probes = static_cast<int32_t>(parse_int_or_throw(toks[5], "leaf"));
      l.stats.total_probes = static_cast<int32_t>(parse_int_or_throw(toks[6], "leaf"));
      l.stats.min_det_a = parse_double_or_throw(toks[7], "leaf");
      l.stats.max_det_a = parse_double_or_throw(toks[8], "leaf");
      l.stats.min_b11 = parse_double_or_throw(toks[9], "leaf");
      l.stats.max_b11 = parse_double_or_throw(toks[10], "leaf");
      l.stats.min_b22 = parse_double_or_throw(toks[11], "leaf");
      l.stats.max_b22 = parse_double_or_throw(toks[12], "leaf");
      l.stats.fold_straddle[0] =
          static_cast<uint8_t>(parse_int_or_throw(toks[13], "leaf"));
      l.stats.fold_straddle[1] =
          static_cast<uint8_t>(parse_int_or_throw(toks[14], "leaf"));
      leaves.push_back(l);
    }
    atlas.trees[m] = tree_from_leaves<2>(atlas.decomp.root_box,
                                         atlas.decomp.max_depth, std::move(leaves));
  }

  if (r.take() != "[aspects]") throw CorruptAtlas("missing [aspects] section");
  if (parse_int_or_throw(expect_key(r, "count"), "aspects") !=
      static_cast<long long>(n_aspects))
    throw CorruptAtlas("aspect count mismatch");
  for (size_t i = 0; i < n_aspects; ++i) {
    std::string v = expect_key(r, "aspect");
    auto colon = v.find(':');
    if (colon == std::string::npos) throw CorruptAtlas("bad aspect line");
    auto head = split_ws(std::string_view(v).substr(0, colon));
    if (head.size() != 4) throw CorruptAtlas("bad aspect line");
    Aspect a;
    a.id = static_cast<int32_t>(parse_int_or_throw(head[0], "aspect"));
    a.mode = WorkingMode::from_index(
        static_cast<int>(parse_int_or_throw(head[1], "aspect")));
    a.sigma = static_cast<int>(parse_int_or_throw(head[2], "aspect"));
    size_t nl = parse_int_or_throw(head[3], "aspect");
    for (auto tok : split_ws(std::string_view(v).substr(colon + 1)))
      a.leaves.push_back(static_cast<int32_t>(parse_int_or_throw(tok, "aspect leaf")));
    if (a.leaves.size() != nl) throw CorruptAtlas("aspect leaf count mismatch");
    if (a.id != static_cast<int32_t>(i)) throw CorruptAtlas("aspect ids not dense");
    if (a.sigma != 1 && a.sigma != -1) throw CorruptAtlas("aspect sigma out of range");
    const CellTree<2>& tree = atlas.trees[a.mode.index()];
    for (int32_t li : a.leaves) {
      if (li < 0 || li >= static_cast<int32_t>(tree.leaves.size()))
        throw CorruptAtlas("aspect leaf id out of range");
      if (tree.leaves[li].label != CellLabel::Free)
        throw CorruptAtlas("aspect references a non-Free leaf");
    }
    atlas.aspects.push_back(std::move(a));
  }

  if (r.take() != "[regions]") throw CorruptAtlas("missing [regions] section");
  if (parse_int_or_throw(expect_key(r, "count"), "regions") !=
      static_cast<long long>(n_regions))
    throw CorruptAtlas("region count mismatch");
  for (size_t i = 0; i < n_regions; ++i) {
    std::string v = expect_key(r, "region");
    auto colon = v.find(':');
    if (colon == std::string::npos) throw CorruptAtlas("bad region line");
    auto head = split_ws(std::string_view(v).substr(0, colon));
    if (head.size() != 3) throw CorruptAtlas("bad region line");
    ReachableRegion reg;
    reg.id = static_cast<int32_t>(parse_int_or_throw(head[0], "region"));
    reg.sigma = static_cast<int>(parse_int_or_throw(head[1], "region"));
    size_t na = parse_int_or_throw(head[2], "region");
    for (auto tok : split_ws(std::string_view(v).substr(colon + 1)))
      reg.aspects.push_back(static_cast<int32_t>(parse_int_or_throw(tok, "region")));
    if (reg.aspects.size() != na) throw CorruptAtlas("region aspect count mismatch");
    if (reg.id != static_cast<int32_t>(i)) throw CorruptAtlas("region ids not dense");
    for (int32_t ai : reg.aspects) {
      if (ai < 0 || ai >= static_cast<int32_t>(atlas.aspects.size()))
        throw CorruptAtlas("region aspect id out of range");
      if (atlas.aspects[ai].sigma != reg.sigma)
        throw CorruptAtlas("region sigma does not match its aspects");
    }
    atlas.regions.push_back(std::move(reg));
  }

  // Projections: recompute from the aspect lists, then check the stored rows
  // against them so corruption cannot slip through.
  for (const Aspect& a : atlas.aspects)
    atlas.wt.push_back(project(a, atlas.trees, atlas.decomp.max_depth));
  for (const ReachableRegion& reg : atlas.regions)
    atlas.wn.push_back(
        project(reg, atlas.aspects, atlas.trees, atlas.decomp.max_depth));

  for (const WorkspaceRegion& w : atlas.wt) {
    if (r.take() != "[wt " + std::to_string(w.id) + "]")
      throw CorruptAtlas("missing [wt " + std::to_string(w.id) + "] section");
    if (parse_int_or_throw(expect_key(r, "source"), "wt") != w.source_id)
      throw CorruptAtlas("wt source mismatch");
    uint64_t cells = parse_int_or_throw(expect_key(r, "cells"), "wt");
    Footprint fp = read_footprint_rows(r, grid, cells);
    if (!(fp == w.footprint)) throw CorruptAtlas("wt footprint mismatch");
  }
  for (const WorkspaceRegion& w : atlas.wn) {
    if (r.take() != "[wn " + std::to_string(w.id) + "]")
      throw CorruptAtlas("missing [wn " + std::to_string(w.id) + "] section");
    if (parse_int_or_throw(expect_key(r, "source"), "wn") != w.source_id)
      throw CorruptAtlas("wn source mismatch");
    uint64_t cells = parse_int_or_throw(expect_key(r, "cells"), "wn");
    Footprint fp = read_footprint_rows(r, grid, cells);
    if (!(fp == w.footprint)) throw CorruptAtlas("wn footprint mismatch");
  }

  if (r.eof || r.take() != "[end]") throw CorruptAtlas("atlas truncated");
  atlas.rebuild_leaf_aspect();
  return doc;
}

}  // namespace parakin
