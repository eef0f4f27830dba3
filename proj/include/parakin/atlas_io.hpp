#pragma once

#include <string>

#include "parakin/config.hpp"
#include "parakin/region.hpp"

namespace parakin {

inline constexpr const char* kAtlasVersion = "atlas-v1";

// The persisted product of a `regions` run: the run configuration echo plus
// the atlas itself.
struct AtlasDocument {
  RunConfig config;
  RegionAtlas atlas;

  bool operator==(const AtlasDocument& o) const {
    return config == o.config && atlas == o.atlas;
  }
};

// Versioned plain-text document; byte-identical for identical inputs and
// lossless under import (shortest round-trip float formatting).
std::string export_atlas(const AtlasDocument& doc);

// Throws VersionError on a wrong header line, CorruptAtlas on anything
// structurally or semantically inconsistent (including truncation).
AtlasDocument import_atlas(const std::string& text);

}  // namespace parakin
