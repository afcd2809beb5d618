#pragma once

#include <random>
#include <vector>

#include "mgfc/calib.hpp"
#include "mgfc/totp.hpp"

namespace testutil {

using namespace mgfc;

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline RigidTransform random_transform(std::mt19937_64& rng,
                                       double span = 1.0) {
  std::uniform_real_distribution<double> u(-span, span);
  return RigidTransform(random_rotation(rng), Vec3(u(rng), u(rng), u(rng)));
}

inline Vec3 random_vec3(std::mt19937_64& rng, double span = 1.0) {
  std::uniform_real_distribution<double> u(-span, span);
  return Vec3(u(rng), u(rng), u(rng));
}

inline Vec6 random_wrench_vec(std::mt19937_64& rng, double moment_span,
                              double force_span) {
  Vec6 v;
  v << random_vec3(rng, moment_span), random_vec3(rng, force_span);
  return v;
}

// Test-only SE(3) exponential, for the twist-integration oracle.
inline RigidTransform exp_twist(const Vec6& twist, double dt) {
  const Vec3 w = twist.head<3>() * dt;
  const Vec3 u = twist.tail<3>() * dt;
  const double theta = w.norm();
  if (theta < 1e-12) {
    return RigidTransform(Mat3::Identity(), u);
  }
  const Mat3 wx = skew(w);
  const Mat3 r = Mat3::Identity() + std::sin(theta) / theta * wx +
                 (1.0 - std::cos(theta)) / (theta * theta) * wx * wx;
  const Mat3 g = Mat3::Identity() +
                 (1.0 - std::cos(theta)) / (theta * theta) * wx +
                 (theta - std::sin(theta)) / (theta * theta * theta) * wx * wx;
  return RigidTransform(r, g * u);
}

// Rectangular cup grid centered on the tool origin, normals along tool z.
// `skip` removes cups by index (row-major), matching the ablation layouts.
inline GripperModel grid_gripper(int nx, int ny, double pitch,
                                 double pad_radius = 0.03, double psi = 118.6,
                                 double mu = 0.7,
                                 StiffnessWeights weights =
                                     testbed_fitted_weights(),
                                 const std::vector<int>& skip = {},
                                 const std::vector<double>& z_heights = {}) {
  std::vector<SuctionCup> cups;
  int idx = 0;
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy, ++idx) {
      if (std::find(skip.begin(), skip.end(), idx) != skip.end()) continue;
      SuctionCup cup;
      const double x = (ix - 0.5 * (nx - 1)) * pitch;
      const double y = (iy - 0.5 * (ny - 1)) * pitch;
      const double z = idx < static_cast<int>(z_heights.size())
                           ? z_heights[idx]
                           : 0.0;
      cup.pose_in_tool = RigidTransform(Mat3::Identity(), Vec3(x, y, z));
      cup.pad_radius = pad_radius;
      cup.suction_force = psi;
      cups.push_back(cup);
    }
  }
  return GripperModel(std::move(cups), mu, weights);
}

inline GripperModel testbed6() { return grid_gripper(3, 2, 0.1); }

inline KinematicChain one_joint_chain() {
  KinematicChain c;
  c.joints.push_back(RevoluteJoint{});
  return c;
}

// Three-joint chain used by the synthetic scenarios: base yaw, two pitch
// joints, tool flipped so its z axis points down at q = 0.
inline KinematicChain arm3_chain() {
  KinematicChain c;
  RevoluteJoint j1;
  j1.axis = Vec3::UnitZ();
  RevoluteJoint j2;
  j2.axis = Vec3::UnitY();
  j2.offset = RigidTransform(Mat3::Identity(), Vec3(0, 0, 0.5));
  RevoluteJoint j3;
  j3.axis = Vec3::UnitY();
  j3.offset = RigidTransform(Mat3::Identity(), Vec3(0.5, 0, 0));
  c.joints = {j1, j2, j3};
  Mat3 flip;
  flip << 1, 0, 0, 0, -1, 0, 0, 0, -1;  // rotate pi about x
  c.tool_offset = RigidTransform(flip, Vec3(0.5, 0, 0));
  return c;
}

inline PathSpec straight_path(const Eigen::VectorXd& q0,
                              const Eigen::VectorXd& q1) {
  Eigen::MatrixXd knots(2, q0.size());
  knots.row(0) = q0.transpose();
  knots.row(1) = q1.transpose();
  return PathSpec(Eigen::VectorXd::LinSpaced(2, 0.0, 1.0), knots);
}

inline PathSpec random_path(std::mt19937_64& rng, int dof, int n_rows,
                            double span = 0.8) {
  std::uniform_real_distribution<double> u(-span, span);
  Eigen::MatrixXd knots(n_rows, dof);
  for (int r = 0; r < n_rows; ++r) {
    for (int j = 0; j < dof; ++j) knots(r, j) = u(rng);
  }
  return PathSpec(Eigen::VectorXd::LinSpaced(n_rows, 0.0, 1.0), knots);
}

// Yaw sweep with a vertical bob; tool z stays world-down (q3 cancels q2).
inline PathSpec topdown_path() {
  Eigen::MatrixXd knots(5, 3);
  knots << 0.0, 0.0, 0.0,      //
      0.3, 0.15, -0.15,        //
      0.6, 0.3, -0.3,          //
      0.9, 0.15, -0.15,        //
      1.2, 0.0, 0.0;
  return PathSpec(Eigen::VectorXd::LinSpaced(5, 0.0, 1.0), knots);
}

// Yaw sweep with the wrist pitched so the tool z axis is horizontal.
inline PathSpec sideways_path() {
  Eigen::MatrixXd knots(5, 3);
  const double q2 = -0.9;
  const double q3 = -1.5707963267948966 - q2;
  for (int r = 0; r < 5; ++r) {
    knots(r, 0) = 0.3 * r;
    knots(r, 1) = q2;
    knots(r, 2) = q3;
  }
  return PathSpec(Eigen::VectorXd::LinSpaced(5, 0.0, 1.0), knots);
}

inline KinematicLimits arm3_limits(double vel = 3.0, double acc = 8.0) {
  KinematicLimits lim;
  lim.vel_max = Eigen::VectorXd::Constant(3, vel);
  lim.acc_max = Eigen::VectorXd::Constant(3, acc);
  return lim;
}

// Carry scenario on the three-joint arm with the six-cup gripper.
inline TotpProblem carry_problem(bool sideways, double mass_kg, int n_knots,
                                 bool grasp, double com_z = 0.15,
                                 double acc = 8.0, double vel = 3.0) {
  TotpProblem p{.path = sideways ? sideways_path() : topdown_path(),
                .chain = arm3_chain(),
                .limits = arm3_limits(vel, acc)};
  const double edge = std::min(0.45, 0.2 + 0.02 * mass_kg);
  p.object = ObjectModel::box(mass_kg, Vec3(edge, edge, 2.0 * com_z),
                              Vec3(0, 0, com_z));
  p.gripper = testbed6();
  p.n_knots = n_knots;
  p.grasp_enabled = grasp;
  return p;
}

// Rest-to-rest single joint over 1 rad with only an acceleration limit; the
// optimum is the bang-bang profile with T = 2 sqrt(L / a).
inline TotpProblem bangbang_problem(int n_knots, double acc = 2.0) {
  Eigen::VectorXd q0(1), q1(1);
  q0 << 0.0;
  q1 << 1.0;
  KinematicLimits lim;
  lim.vel_max = Eigen::VectorXd::Constant(1, 1e3);
  lim.acc_max = Eigen::VectorXd::Constant(1, acc);
  TotpProblem p{.path = straight_path(q0, q1),
                .chain = one_joint_chain(),
                .limits = lim};
  p.n_knots = n_knots;
  return p;
}

}  // namespace testutil
