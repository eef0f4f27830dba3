#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "parakin/errors.hpp"

namespace parakin {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
};

inline Vec2 operator*(double s, const Vec2& v) { return {s * v.x, s * v.y}; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline Vec2 rot90(const Vec2& v) { return {-v.y, v.x}; }
inline Vec2 unit_dir(double angle) { return {std::cos(angle), std::sin(angle)}; }

// Wraps an angle to (-pi, pi].
inline double canonical_angle(double a) {
  double r = std::remainder(a, 2.0 * M_PI);
  if (r <= -M_PI) r = M_PI;
  return r;
}

// Planar five-bar linkage: two legs (proximal + distal link each) joining
// the bases to the common platform point P. Bases are normalized to
// baseA = (0,0), baseB = (L0,0); any planar pose of the base frame is a
// rigid transform of this one.
struct ManipulatorGeometry {
  double L0 = 0.0;  // base spacing
  double L1 = 0.0;  // leg 1 proximal
  double L2 = 0.0;  // leg 1 distal
  double L3 = 0.0;  // leg 2 proximal
  double L4 = 0.0;  // leg 2 distal
  double theta_min = 0.0;
  double theta_max = 0.0;

  Vec2 base_a() const { return {0.0, 0.0}; }
  Vec2 base_b() const { return {L0, 0.0}; }
  Vec2 base(int leg) const { return leg == 0 ? base_a() : base_b(); }
  double proximal(int leg) const { return leg == 0 ? L1 : L3; }
  double distal(int leg) const { return leg == 0 ? L2 : L4; }

  bool operator==(const ManipulatorGeometry&) const = default;

  // Throws ValidationError when a field invariant is violated.
  void validate() const {
    if (!(L0 > 0.0 && L1 > 0.0 && L2 > 0.0 && L3 > 0.0 && L4 > 0.0))
      throw ValidationError("geometry: all lengths must be strictly positive");
    if (!(theta_min < theta_max))
      throw ValidationError("geometry: theta_min must be < theta_max");
  }
};

// The reference instance used throughout the docs and the shipped default
// config: L0=7, L1=8, L2=5, L3=8, L4=5, actuated joints limited to [0, pi].
inline ManipulatorGeometry default_geometry() {
  return {7.0, 8.0, 5.0, 8.0, 5.0, 0.0, M_PI};
}

struct JointConfig {
  double theta1 = 0.0;
  double theta2 = 0.0;
};

struct PlatformConfig {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 vec(const PlatformConfig& p) { return {p.x, p.y}; }
inline PlatformConfig platform(const Vec2& v) { return {v.x, v.y}; }

// Inverse-kinematics branch label: the sign of each diagonal entry of B,
// one per leg. Ordered lexicographically by (gamma1, gamma2) with -1 < +1.
struct WorkingMode {
  int gamma1 = +1;
  int gamma2 = +1;

  int gamma(int leg) const { return leg == 0 ? gamma1 : gamma2; }

  int index() const { return (gamma1 > 0 ? 2 : 0) + (gamma2 > 0 ? 1 : 0); }
  static WorkingMode from_index(int i) {
    return {(i & 2) ? +1 : -1, (i & 1) ? +1 : -1};
  }
  static std::array<WorkingMode, 4> all() {
    return {WorkingMode{-1, -1}, WorkingMode{-1, +1}, WorkingMode{+1, -1},
            WorkingMode{+1, +1}};
  }

  std::string str() const {
    std::string s;
    s += gamma1 > 0 ? '+' : '-';
    s += gamma2 > 0 ? '+' : '-';
    return s;
  }

  bool operator==(const WorkingMode& o) const = default;
};

// Direct-kinematics branch label: the sign of det(A).
struct AssemblyMode {
  int sigma = +1;

  bool operator==(const AssemblyMode& o) const = default;
};

}  // namespace parakin
