#pragma once

#include <array>
#include <optional>
#include <vector>

#include "parakin/geometry.hpp"

namespace parakin {

// Default algebraic tolerances. Cell classification uses its own
// resolution-coupled tolerances, see cell_tree.hpp.
inline constexpr double kTauF = 1e-9;  // constraint validity, length^2
inline constexpr double kTauA = 1e-9;  // |det A| singularity threshold
inline constexpr double kTauB = 1e-9;  // |B_jj| singularity threshold

// Velocity model A * xdot + B * qdot = 0 for the planar five-bar; the
// platform twist reduces to the 2-vector xdot (no platform rotation).
// Conventions: A rows are (P-C)^T and (P-D)^T unnormalized; B is diagonal
// with B_jj = -L_p * (P - elbow_j) . n_j, n_j = (-sin theta_j, cos theta_j),
// so that differentiating the circle constraints gives the model exactly.
struct KinematicMatrices {
  std::array<std::array<double, 2>, 2> a{};  // direct-kinematics matrix
  double b11 = 0.0;
  double b22 = 0.0;
  double det_a = 0.0;
  double det_b = 0.0;

  // B as a full matrix; off-diagonals are identically zero.
  double b(int i, int j) const {
    if (i != j) return 0.0;
    return i == 0 ? b11 : b22;
  }
};

enum class SingularityClass { Regular, Serial, Parallel, Both };

struct FkSolution {
  PlatformConfig x;
  bool degenerate = false;  // circles tangent: det A ~ 0 at the solution
};

struct IkSolution {
  JointConfig q;
  WorkingMode mode;
  // Per-leg flag: the two elbow branches merged (|B_jj| <= tau_b). A merged
  // leg matches either gamma in branch-restricted queries.
  std::array<bool, 2> serial_singular{false, false};
};

// One leg's elbow triangle at platform position X.
struct LegSolution {
  bool reachable = false;  // distance to base within [|Lp-Ld|, Lp+Ld]
  double r = 0.0;          // |X - base|
  double phi = 0.0;        // direction angle of X - base
  double beta = 0.0;       // interior angle at the base, in [0, pi]

  // Actuated angle of the gamma branch, canonicalized to (-pi, pi].
  double theta(int gamma) const { return canonical_angle(phi + gamma * beta); }
  // Closed-form diagonal entry for the gamma branch: gamma * Lp * r * sin(beta).
  double b_diag(int gamma, double lp) const { return gamma * lp * r * std::sin(beta); }
  // Branches merged within |B_jj| <= tau_b.
  bool merged(double lp, double tau_b) const { return std::abs(b_diag(+1, lp)) <= tau_b; }
};

LegSolution solve_leg(const Vec2& base, double lp, double ld, const Vec2& x);
LegSolution solve_leg(const ManipulatorGeometry& geom, int leg, const PlatformConfig& x);

// Elbow points C and D for given actuated angles.
Vec2 elbow(const ManipulatorGeometry& geom, int leg, double theta);

// Residual of the two circle constraints, (|P-C|^2 - L2^2, |P-D|^2 - L4^2).
// Zero iff (X, q) is a valid manipulator configuration.
std::array<double, 2> constraint_residual(const ManipulatorGeometry& geom,
                                          const PlatformConfig& x,
                                          const JointConfig& q);

// Intersects the two distal circles and picks the branch with
// sign(cross(P-C, P-D)) = sigma. Empty when the circles do not meet; when
// tangent within tau_a the single point is returned flagged degenerate.
std::optional<FkSolution> forward_kinematics(const ManipulatorGeometry& geom,
                                             const JointConfig& q,
                                             AssemblyMode sigma,
                                             double tau_a = kTauA);

// All joint solutions at X whose angles lie within the joint limits, each
// annotated with its working mode, sorted by mode order. Legs at a branch
// merge contribute a single solution flagged serial-singular.
std::vector<IkSolution> inverse_kinematics(const ManipulatorGeometry& geom,
                                           const PlatformConfig& x,
                                           double tau_b = kTauB);

// The unique element of inverse_kinematics(x) carrying this mode (merged
// legs match either sign), or nothing.
std::optional<IkSolution> inverse_kinematics_branch(const ManipulatorGeometry& geom,
                                                    const PlatformConfig& x,
                                                    WorkingMode mode,
                                                    double tau_b = kTauB);

// Throws InvalidConfiguration when the constraint residual max-norm
// exceeds tau_f.
KinematicMatrices jacobians(const ManipulatorGeometry& geom,
                            const PlatformConfig& x, const JointConfig& q,
                            double tau_f = kTauF);

// Conservative: a determinant exactly at the tolerance is singular.
SingularityClass classify_singularity(const KinematicMatrices& m, double tau_a,
                                      double tau_b);

// Closed-interval limit test after canonicalization; the interval may extend
// past the canonical range, so membership is tested up to a 2*pi shift.
bool in_joint_limits(const ManipulatorGeometry& geom, const JointConfig& q);
bool angle_in_limits(double theta, double lo, double hi);

// Serial-singularity locus of one leg: the stretched (outer) and folded
// (inner) circles about its base. On a fold circle both elbow branches of
// the leg coincide at the merged angle.
struct FoldCircle {
  int leg = 0;
  bool outer = true;
  Vec2 base;
  double radius = 0.0;
  // Folded circle of a leg whose distal link is the longer one: the
  // proximal link points away from X instead of at it.
  bool radius_sign_flipped = false;

  // Actuated angle of the merged configuration at a point X on the circle.
  double merged_theta(const Vec2& x) const;
};

std::array<FoldCircle, 2> fold_circles(const ManipulatorGeometry& geom, int leg);

}  // namespace parakin
