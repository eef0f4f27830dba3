#pragma once

#include <stdexcept>
#include <string>

namespace parakin {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// (X, q) handed to a routine that requires a consistent manipulator
// configuration, but the constraint residual is above tolerance.
struct InvalidConfiguration : Error {
  using Error::Error;
};

// Subdivision would exceed the configured leaf cap.
struct LeafBudgetExceeded : Error {
  using Error::Error;
};

// A sample along an accepted continuous trajectory lost its IK branch.
struct LiftBroken : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct ValidationError : Error {
  using Error::Error;
};

struct VersionError : Error {
  using Error::Error;
};

struct CorruptAtlas : Error {
  using Error::Error;
};

struct UnknownRegionId : Error {
  using Error::Error;
};

}  // namespace parakin
