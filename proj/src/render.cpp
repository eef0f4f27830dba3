#include "parakin/render.hpp"

#include <sstream>

#include "parakin/kinematics.hpp"
#include "parakin/text.hpp"

namespace parakin {

MapSelector MapSelector::parse(const std::string& text) {
  MapSelector s;
  if (text == "workspace") {
    s.kind = Kind::Workspace;
  } else if (text == "singular") {
    s.kind = Kind::SingularLoci;
  } else if (text.starts_with("wt:")) {
    s.kind = Kind::TRegion;
    s.id = static_cast<int32_t>(parse_int_or_throw(
        std::string_view(text).substr(3), "selector"));
  } else if (text.starts_with("wn:")) {
    s.kind = Kind::NRegion;
    s.id = static_cast<int32_t>(parse_int_or_throw(
        std::string_view(text).substr(3), "selector"));
  } else {
    throw ParseError("unknown map selector '" + text +
                     "' (want workspace | singular | wt:<id> | wn:<id>)");
  }
  return s;
}

std::string MapSelector::str() const {
  switch (kind) {
    case Kind::Workspace: return "workspace";
    case Kind::SingularLoci: return "singular";
    case Kind::TRegion: return "wt:" + std::to_string(id);
    case Kind::NRegion: return "wn:" + std::to_string(id);
  }
  return "?";
}

int palette_gray(PixelClass c) {
  switch (c) {
    case PixelClass::Background: return 255;
    case PixelClass::Free: return 170;
    case PixelClass::BoundaryCovered: return 120;
    case PixelClass::BoundaryUncovered: return 220;
    case PixelClass::Serial: return 90;
    case PixelClass::Parallel: return 30;
    case PixelClass::Mixed: return 60;
    case PixelClass::Member: return 100;
    case PixelClass::Backdrop: return 210;
  }
  return 255;
}

const char* palette_fill(PixelClass c) {
  switch (c) {
    case PixelClass::Background: return "#ffffff";
    case PixelClass::Free: return "#b8b8b8";
    case PixelClass::BoundaryCovered: return "#8a8a8a";
    case PixelClass::BoundaryUncovered: return "#e6e6e6";
    case PixelClass::Serial: return "#4472c4";
    case PixelClass::Parallel: return "#c00000";
    case PixelClass::Mixed: return "#7030a0";
    case PixelClass::Member: return "#2e7d32";
    case PixelClass::Backdrop: return "#dcdcdc";
  }
  return "#ffffff";
}

namespace {

const WorkspaceRegion* find_region(const RegionAtlas& atlas, const MapSelector& sel) {
  const auto& list = sel.kind == MapSelector::Kind::TRegion ? atlas.wt : atlas.wn;
  for (const WorkspaceRegion& w : list)
    if (w.id == sel.id) return &w;
  throw UnknownRegionId("no region " + sel.str() + " in this atlas");
}

// Pixel class under a given selector at workspace point p.
PixelClass classify_pixel(const RegionAtlas& atlas, const MapSelector& sel,
                          const WorkspaceRegion* region, const Vec2& p) {
  std::array<double, 2> pt{p.x, p.y};
  bool any_free = false, any_serial = false, any_parallel = false, any_mixed = false;
  for (int m = 0; m < 4; ++m) {
    int32_t li = atlas.trees[m].leaf_at(pt);
    if (li < 0) continue;
    switch (atlas.trees[m].leaves[li].label) {
      case CellLabel::Free: any_free = true; break;
      case CellLabel::SerialBoundary: any_serial = true; break;
      case CellLabel::ParallelBoundary: any_parallel = true; break;
      case CellLabel::MixedBoundary: any_mixed = true; break;
      case CellLabel::Outside: break;
    }
  }
  switch (sel.kind) {
    case MapSelector::Kind::Workspace: {
      if (any_free) return PixelClass::Free;
      if (any_serial || any_parallel || any_mixed) {
        // Boundary band: settle membership pointwise with exact kinematics.
        bool reachable = !inverse_kinematics(atlas.geom, platform(p)).empty();
        return reachable ? PixelClass::BoundaryCovered : PixelClass::BoundaryUncovered;
      }
      return PixelClass::Background;
    }
    case MapSelector::Kind::SingularLoci: {
      if (any_parallel) return PixelClass::Parallel;
      if (any_mixed) return PixelClass::Mixed;
      if (any_serial) return PixelClass::Serial;
      if (any_free) return PixelClass::Free;
      return PixelClass::Background;
    }
    case MapSelector::Kind::TRegion:
    case MapSelector::Kind::NRegion: {
      const Footprint& fp = region->footprint;
      double gx = (p.x - atlas.decomp.root_box.lo[0]) /
                  (atlas.decomp.root_box.hi[0] - atlas.decomp.root_box.lo[0]) * fp.grid;
      double gy = (p.y - atlas.decomp.root_box.lo[1]) /
                  (atlas.decomp.root_box.hi[1] - atlas.decomp.root_box.lo[1]) * fp.grid;
      int64_t cx = std::min<int64_t>(static_cast<int64_t>(gx), fp.grid - 1);
      int64_t cy = std::min<int64_t>(static_cast<int64_t>(gy), fp.grid - 1);
      if (fp.get(cx, cy)) return PixelClass::Member;
      if (any_free) return PixelClass::Backdrop;
      return PixelClass::Background;
    }
  }
  return PixelClass::Background;
}

void svg_rect(std::string& out, const CellBox<2>& box, double ymin, double ymax,
              PixelClass cls) {
  // Flip y so the image matches the raster orientation (y up in workspace).
  double h = box.hi[1] - box.lo[1];
  double y = (ymin + ymax) - box.lo[1] - h;
  out += "<rect x=\"" + fmt_double(box.lo[0]) + "\" y=\"" + fmt_double(y) +
         "\" width=\"" + fmt_double(box.hi[0] - box.lo[0]) + "\" height=\"" +
         fmt_double(h) + "\" fill=\"" + palette_fill(cls) + "\"/>\n";
}

std::string render_svg(const RegionAtlas& atlas, const MapSelector& sel,
                       const WorkspaceRegion* region) {
  const CellBox<2>& rb = atlas.decomp.root_box;
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" +
         fmt_double(rb.lo[0]) + " " + fmt_double(rb.lo[1]) + " " +
         fmt_double(rb.hi[0] - rb.lo[0]) + " " + fmt_double(rb.hi[1] - rb.lo[1]) +
         "\">\n";
  out += "<!-- " + sel.str() + " -->\n";

  auto emit_label = [&](CellLabel want, PixelClass cls) {
    for (int m = 0; m < 4; ++m) {
      const CellTree<2>& tree = atlas.trees[m];
      for (size_t li = 0; li < tree.leaves.size(); ++li)
        if (tree.leaves[li].label == want)
          svg_rect(out, tree.leaf_box(static_cast<int32_t>(li)), rb.lo[1], rb.hi[1],
                   cls);
    }
  };

  switch (sel.kind) {
    case MapSelector::Kind::Workspace:
      emit_label(CellLabel::Free, PixelClass::Free);
      break;
    case MapSelector::Kind::SingularLoci:
      emit_label(CellLabel::Free, PixelClass::Free);
      // Painter order matches the raster priority: parallel bands on top.
      emit_label(CellLabel::SerialBoundary, PixelClass::Serial);
      emit_label(CellLabel::MixedBoundary, PixelClass::Mixed);
      emit_label(CellLabel::ParallelBoundary, PixelClass::Parallel);
      break;
    case MapSelector::Kind::TRegion:
    case MapSelector::Kind::NRegion:
      for (const auto& [mode, li] : region->leaves)
        svg_rect(out, atlas.trees[mode].leaf_box(li), rb.lo[1], rb.hi[1],
                 PixelClass::Member);
      break;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace

RenderResult render_region_map(const RegionAtlas& atlas, const MapSelector& sel,
                               const RenderConfig& cfg) {
  cfg.validate();
  const WorkspaceRegion* region = nullptr;
  if (sel.kind == MapSelector::Kind::TRegion || sel.kind == MapSelector::Kind::NRegion)
    region = find_region(atlas, sel);

  const CellBox<2>& rb = atlas.decomp.root_box;
  RenderResult res;
  res.pgm = "P2\n" + std::to_string(cfg.width) + " " + std::to_string(cfg.height) +
            "\n255\n";
  // Row 0 is the top of the image (max y).
  for (int row = 0; row < cfg.height; ++row) {
    std::string line;
    double y = rb.hi[1] - (rb.hi[1] - rb.lo[1]) * (row + 0.5) / cfg.height;
    for (int col = 0; col < cfg.width; ++col) {
      double x = rb.lo[0] + (rb.hi[0] - rb.lo[0]) * (col + 0.5) / cfg.width;
      PixelClass c = classify_pixel(atlas, sel, region, {x, y});
      if (col) line += " ";
      line += std::to_string(palette_gray(c));
    }
    res.pgm += line + "\n";
  }
  res.svg = render_svg(atlas, sel, region);
  return res;
}

int64_t count_covered_pixels(const std::string& pgm) {
  std::istringstream in(pgm);
  std::string magic;
  int w = 0, h = 0, maxv = 0;
  in >> magic >> w >> h >> maxv;
  if (magic != "P2") throw ParseError("not a P2 graymap");
  int64_t covered = 0;
  int v = 0;
  while (in >> v)
    if (v == palette_gray(PixelClass::Free) ||
        v == palette_gray(PixelClass::BoundaryCovered))
      ++covered;
  return covered;
}

}  // namespace parakin
