#pragma once

#include <string>

#include "parakin/config.hpp"
#include "parakin/region.hpp"

namespace parakin {

// What a map should show: the whole workspace, the singularity bands, or a
// single T-/N-connected region.
struct MapSelector {
  enum class Kind { Workspace, SingularLoci, TRegion, NRegion };
  Kind kind = Kind::Workspace;
  int32_t id = -1;

  // "workspace", "singular", "wt:<id>", "wn:<id>"
  static MapSelector parse(const std::string& text);
  std::string str() const;
};

// Pixel classes shared by the raster and the vector overlay.
enum class PixelClass : uint8_t {
  Background,
  Free,
  BoundaryCovered,    // boundary leaf, exact kinematics reaches the pixel
  BoundaryUncovered,  // boundary leaf, pixel not reachable
  Serial,
  Parallel,
  Mixed,
  Member,    // selected region
  Backdrop,  // workspace context behind a selected region
};

int palette_gray(PixelClass c);
const char* palette_fill(PixelClass c);

struct RenderResult {
  std::string pgm;  // plain-text P2 graymap
  std::string svg;  // leaf-rectangle overlay
};

// Deterministic byte output for fixed inputs. Throws UnknownRegionId for a
// selector pointing at a region the atlas does not have.
RenderResult render_region_map(const RegionAtlas& atlas, const MapSelector& sel,
                               const RenderConfig& cfg);

// Covered-pixel count of a workspace raster: pixels whose gray encodes
// Free or BoundaryCovered.
int64_t count_covered_pixels(const std::string& pgm);

}  // namespace parakin
