#pragma once

#include <memory>
#include <vector>

#include "mgfc/se3.hpp"
#include "mgfc/spline.hpp"

namespace mgfc {

inline constexpr double kDefaultGravity = 9.8;  // m/s^2

// Serial chain of revolute joints. Each joint rotates about `axis` through
// the point `origin`, both expressed in the frame reached after `offset`.
struct RevoluteJoint {
  Vec3 axis = Vec3::UnitZ();
  Vec3 origin = Vec3::Zero();
  RigidTransform offset;
};

struct KinematicChain {
  std::vector<RevoluteJoint> joints;
  RigidTransform tool_offset;

  int dof() const { return static_cast<int>(joints.size()); }
  void validate() const;
};

RigidTransform forward_kinematics(const KinematicChain& chain,
                                  const Eigen::VectorXd& q);

// Body Jacobian: (omega_t; v_t) = J * qdot, both blocks in the tool frame.
Eigen::MatrixXd body_jacobian(const KinematicChain& chain,
                              const Eigen::VectorXd& q);

// Rigid payload. Inertia is about the object CoM in tool-aligned axes.
struct ObjectModel {
  double mass = 0.0;      // kg
  Mat3 inertia;           // kg m^2
  Vec3 com_offset;        // CoM position in the tool frame, m

  ObjectModel(double mass_kg, const Mat3& inertia_com, const Vec3& com);
  // Uniform-density box of the given dimensions.
  static ObjectModel box(double mass_kg, const Vec3& dims_m, const Vec3& com);
  // Same shape rescaled to a new mass (inertia scales linearly).
  ObjectModel with_mass(double new_mass) const;
};

struct ToolMotion {
  Vec3 gravity_in_tool = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();
  Vec3 angular_acceleration = Vec3::Zero();
  Vec3 linear_acceleration = Vec3::Zero();
};

Wrench newton_euler_tool_wrench(const ToolMotion& motion,
                                const ObjectModel& obj);

// Joint path q(s), s in [0,1], interpolated by a clamped cubic spline.
class PathSpec {
 public:
  PathSpec(Eigen::VectorXd s_grid, Eigen::MatrixXd joint_knots);

  int dof() const { return spline_.dims(); }
  const Eigen::VectorXd& grid() const { return spline_.grid(); }

  Eigen::VectorXd position(double s) const { return spline_.eval(s, 0); }
  Eigen::VectorXd first(double s) const { return spline_.eval(s, 1); }
  Eigen::VectorXd second(double s) const { return spline_.eval(s, 2); }
  Eigen::VectorXd third(double s) const { return spline_.eval(s, 3); }

  double cell_width(double s) const;

 private:
  CubicSpline spline_;
};

// d/ds of the body Jacobian along the path, by central differences
// (one-sided at the ends). h <= 0 selects the default step.
Eigen::MatrixXd jacobian_path_derivative(const KinematicChain& chain,
                                         const PathSpec& path, double s,
                                         double h = -1.0);

// Tool motion induced by (s, sdot, sddot) along the path.
ToolMotion tool_motion(const KinematicChain& chain, const PathSpec& path,
                       double s, double sdot, double sddot,
                       double gravity = kDefaultGravity);

// Coefficients making the tool wrench affine in (sddot, sdot^2):
// F_t = b_ddot * sddot + b_dot * sdot^2 + b_const.
struct WrenchAffineForm {
  Vec6 b_ddot = Vec6::Zero();
  Vec6 b_dot = Vec6::Zero();
  Vec6 b_const = Vec6::Zero();

  Vec6 evaluate(double sdot_sq, double sddot) const {
    return b_ddot * sddot + b_dot * sdot_sq + b_const;
  }
};

WrenchAffineForm parameterize_wrench(const KinematicChain& chain,
                                     const PathSpec& path,
                                     const ObjectModel& obj, double s,
                                     double gravity = kDefaultGravity);

}  // namespace mgfc
