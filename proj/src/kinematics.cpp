#include "parakin/kinematics.hpp"

#include <algorithm>
#include <cmath>

namespace parakin {

LegSolution solve_leg(const Vec2& base, double lp, double ld, const Vec2& x) {
  LegSolution s;
  Vec2 v = x - base;
  double r2 = v.norm2();
  s.r = std::sqrt(r2);
  s.phi = std::atan2(v.y, v.x);
  double lo = std::abs(lp - ld);
  double hi = lp + ld;
  if (s.r < lo || s.r > hi || s.r == 0.0) {
    s.reachable = false;
    return s;
  }
  double c = (lp * lp + r2 - ld * ld) / (2.0 * lp * s.r);
  c = std::clamp(c, -1.0, 1.0);
  s.beta = std::acos(c);
  s.reachable = true;
  return s;
}

LegSolution solve_leg(const ManipulatorGeometry& geom, int leg, const PlatformConfig& x) {
  return solve_leg(geom.base(leg), geom.proximal(leg), geom.distal(leg), vec(x));
}

Vec2 elbow(const ManipulatorGeometry& geom, int leg, double theta) {
  return geom.base(leg) + geom.proximal(leg) * unit_dir(theta);
}

std::array<double, 2> constraint_residual(const ManipulatorGeometry& geom,
                                          const PlatformConfig& x,
                                          const JointConfig& q) {
  Vec2 p = vec(x);
  Vec2 pc = p - elbow(geom, 0, q.theta1);
  Vec2 pd = p - elbow(geom, 1, q.theta2);
  return {pc.norm2() - geom.L2 * geom.L2, pd.norm2() - geom.L4 * geom.L4};
}

std::optional<FkSolution> forward_kinematics(const ManipulatorGeometry& geom,
                                             const JointConfig& q,
                                             AssemblyMode sigma, double tau_a) {
  Vec2 c = elbow(geom, 0, q.theta1);
  Vec2 d = elbow(geom, 1, q.theta2);
  Vec2 e = d - c;
  double dist2 = e.norm2();
  double dist = std::sqrt(dist2);
  if (dist == 0.0) return std::nullopt;  // coincident elbows: circles concentric

  // Chord construction: foot of the radical line at distance a from C,
  // half-chord h. det A at either intersection equals +-(h * dist).
  double r0 = geom.L2, r1 = geom.L4;
  double a = (r0 * r0 - r1 * r1 + dist2) / (2.0 * dist);
  double h2 = r0 * r0 - a * a;
  double h = 0.0;
  if (h2 > 0.0) {
    h = std::sqrt(h2);
  } else if (std::sqrt(-h2) * dist > tau_a) {
    return std::nullopt;  // circles disjoint beyond the tangency tolerance
  }
  Vec2 foot = c + (a / dist) * e;
  if (h * dist <= tau_a) {
    FkSolution sol;
    sol.x = platform(foot);
    sol.degenerate = true;
    return sol;
  }
  Vec2 offset = (h / dist) * rot90(e);
  FkSolution sol;
  sol.x = platform(sigma.sigma > 0 ? foot + offset : foot - offset);
  sol.degenerate = false;
  return sol;
}

bool angle_in_limits(double theta, double lo, double hi) {
  for (int k = -1; k <= 1; ++k) {
    double t = theta + 2.0 * M_PI * k;
    if (t >= lo && t <= hi) return true;
  }
  return false;
}

bool in_joint_limits(const ManipulatorGeometry& geom, const JointConfig& q) {
  return angle_in_limits(canonical_angle(q.theta1), geom.theta_min, geom.theta_max) &&
         angle_in_limits(canonical_angle(q.theta2), geom.theta_min, geom.theta_max);
}

namespace {

struct LegBranch {
  double theta = 0.0;
  int gamma = +1;
  bool merged = false;
};

// Admissible branches of one leg at X, respecting joint limits.
// A merged pair (branches within |B_jj| <= tau_b of each other) collapses
// into one entry carrying gamma = +1 as the representative sign.
std::vector<LegBranch> leg_branches(const ManipulatorGeometry& geom, int leg,
                                    const PlatformConfig& x, double tau_b) {
  std::vector<LegBranch> out;
  LegSolution s = solve_leg(geom, leg, x);
  if (!s.reachable) return out;
  if (s.merged(geom.proximal(leg), tau_b)) {
    double theta = canonical_angle(s.theta(+1));
    if (angle_in_limits(theta, geom.theta_min, geom.theta_max))
      out.push_back({theta, +1, true});
    return out;
  }
  for (int gamma : {-1, +1}) {
    double theta = s.theta(gamma);
    if (angle_in_limits(theta, geom.theta_min, geom.theta_max))
      out.push_back({theta, gamma, false});
  }
  return out;
}

}  // namespace

std::vector<IkSolution> inverse_kinematics(const ManipulatorGeometry& geom,
                                           const PlatformConfig& x, double tau_b) {
  std::vector<IkSolution> out;
  auto b1 = leg_branches(geom, 0, x, tau_b);
  auto b2 = leg_branches(geom, 1, x, tau_b);
  for (const auto& l1 : b1) {
    for (const auto& l2 : b2) {
      IkSolution sol;
      sol.q = {l1.theta, l2.theta};
      sol.mode = {l1.gamma, l2.gamma};
      sol.serial_singular = {l1.merged, l2.merged};
      out.push_back(sol);
    }
  }
  std::sort(out.begin(), out.end(), [](const IkSolution& a, const IkSolution& b) {
    return a.mode.index() < b.mode.index();
  });
  return out;
}

std::optional<IkSolution> inverse_kinematics_branch(const ManipulatorGeometry& geom,
                                                    const PlatformConfig& x,
                                                    WorkingMode mode, double tau_b) {
  for (const auto& sol : inverse_kinematics(geom, x, tau_b)) {
    bool leg1_ok = sol.serial_singular[0] || sol.mode.gamma1 == mode.gamma1;
    bool leg2_ok = sol.serial_singular[1] || sol.mode.gamma2 == mode.gamma2;
    if (leg1_ok && leg2_ok) return sol;
  }
  return std::nullopt;
}

KinematicMatrices jacobians(const ManipulatorGeometry& geom,
                            const PlatformConfig& x, const JointConfig& q,
                            double tau_f) {
  auto res = constraint_residual(geom, x, q);
  if (std::max(std::abs(res[0]), std::abs(res[1])) > tau_f)
    throw InvalidConfiguration("jacobians: constraint residual above tolerance");

  Vec2 p = vec(x);
  Vec2 pc = p - elbow(geom, 0, q.theta1);
  Vec2 pd = p - elbow(geom, 1, q.theta2);
  Vec2 n1 = rot90(unit_dir(q.theta1));
  Vec2 n2 = rot90(unit_dir(q.theta2));

  KinematicMatrices m;
  m.a = {{{pc.x, pc.y}, {pd.x, pd.y}}};
  m.b11 = -geom.L1 * dot(pc, n1);
  m.b22 = -geom.L3 * dot(pd, n2);
  m.det_a = cross(pc, pd);
  m.det_b = m.b11 * m.b22;
  return m;
}

SingularityClass classify_singularity(const KinematicMatrices& m, double tau_a,
                                      double tau_b) {
  bool parallel = std::abs(m.det_a) <= tau_a;
  bool serial = std::min(std::abs(m.b11), std::abs(m.b22)) <= tau_b;
  if (parallel && serial) return SingularityClass::Both;
  if (parallel) return SingularityClass::Parallel;
  if (serial) return SingularityClass::Serial;
  return SingularityClass::Regular;
}

double FoldCircle::merged_theta(const Vec2& x) const {
  Vec2 v = x - base;
  // Stretched leg: the proximal link points at X. Folded: it points at X
  // when the proximal link is the longer one, away from X otherwise.
  if (!outer && radius_sign_flipped) return canonical_angle(std::atan2(-v.y, -v.x));
  return canonical_angle(std::atan2(v.y, v.x));
}

std::array<FoldCircle, 2> fold_circles(const ManipulatorGeometry& geom, int leg) {
  double lp = geom.proximal(leg), ld = geom.distal(leg);
  FoldCircle outer{leg, true, geom.base(leg), lp + ld};
  FoldCircle inner{leg, false, geom.base(leg), std::abs(lp - ld)};
  inner.radius_sign_flipped = ld > lp;
  return {outer, inner};
}

}  // namespace parakin
