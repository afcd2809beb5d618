#include "mgfc/dynamics.hpp"

#include <cmath>

namespace mgfc {

void KinematicChain::validate() const {
  if (joints.empty()) throw Error("KinematicChain: needs at least one joint");
  for (const auto& j : joints) {
    if (std::abs(j.axis.norm() - 1.0) > 1e-12) {
      throw Error("KinematicChain: joint axes must be unit vectors");
    }
  }
}

namespace {

RigidTransform joint_rotation(const RevoluteJoint& j, double angle) {
  Mat3 r = Eigen::AngleAxisd(angle, j.axis).toRotationMatrix();
  return RigidTransform(r, j.origin - r * j.origin);
}

void check_dims(const KinematicChain& chain, const Eigen::VectorXd& q) {
  if (q.size() != chain.dof()) {
    throw DimensionMismatch("joint vector has size " +
                            std::to_string(q.size()) + ", chain expects " +
                            std::to_string(chain.dof()));
  }
}

}  // namespace

RigidTransform forward_kinematics(const KinematicChain& chain,
                                  const Eigen::VectorXd& q) {
  check_dims(chain, q);
  RigidTransform t;
  for (int j = 0; j < chain.dof(); ++j) {
    t = compose(t, compose(chain.joints[j].offset,
                           joint_rotation(chain.joints[j], q[j])));
  }
  return compose(t, chain.tool_offset);
}

Eigen::MatrixXd body_jacobian(const KinematicChain& chain,
                              const Eigen::VectorXd& q) {
  check_dims(chain, q);
  const int n = chain.dof();

  // World pose of each joint's axis frame (before its own rotation).
  std::vector<RigidTransform> pre(n);
  RigidTransform t;
  for (int j = 0; j < n; ++j) {
    t = compose(t, chain.joints[j].offset);
    pre[j] = t;
    t = compose(t, joint_rotation(chain.joints[j], q[j]));
  }
  RigidTransform tool = compose(t, chain.tool_offset);
  RigidTransform tool_inv = tool.inverse();

  Eigen::MatrixXd jac(6, n);
  for (int j = 0; j < n; ++j) {
    Vec6 screw;
    screw << chain.joints[j].axis,
        chain.joints[j].origin.cross(chain.joints[j].axis);
    jac.col(j) = adjoint(compose(tool_inv, pre[j])) * screw;
  }
  return jac;
}

ObjectModel::ObjectModel(double mass_kg, const Mat3& inertia_com,
                         const Vec3& com)
    : mass(mass_kg), inertia(inertia_com), com_offset(com) {
  if (!(mass > 0.0)) throw Error("ObjectModel: mass must be positive");
  if ((inertia - inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error("ObjectModel: inertia must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(inertia);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw Error("ObjectModel: inertia must be positive definite");
  }
}

ObjectModel ObjectModel::box(double mass_kg, const Vec3& dims_m,
                             const Vec3& com) {
  const double a = dims_m.x(), b = dims_m.y(), c = dims_m.z();
  Mat3 inertia = (mass_kg / 12.0) *
                 Vec3(b * b + c * c, c * c + a * a, a * a + b * b).asDiagonal();
  return ObjectModel(mass_kg, inertia, com);
}

ObjectModel ObjectModel::with_mass(double new_mass) const {
  return ObjectModel(new_mass, inertia * (new_mass / mass), com_offset);
}

Wrench newton_euler_tool_wrench(const ToolMotion& motion,
                                const ObjectModel& obj) {
  const Vec3& w = motion.angular_velocity;
  const Vec3& al = motion.angular_acceleration;
  Mat3 pc = skew(obj.com_offset);
  Vec3 lin = motion.linear_acceleration + pc * al - motion.gravity_in_tool;
  Vec3 force = obj.mass * lin;
  Vec3 moment = obj.inertia * al + w.cross(obj.inertia * w) + pc * force;
  return Wrench(moment, force);
}

PathSpec::PathSpec(Eigen::VectorXd s_grid, Eigen::MatrixXd joint_knots)
    : spline_(std::move(s_grid), std::move(joint_knots)) {
  const auto& g = spline_.grid();
  if (std::abs(g[0]) > 1e-12 || std::abs(g[g.size() - 1] - 1.0) > 1e-12) {
    throw Error("PathSpec: s grid must start at 0 and end at 1");
  }
}

double PathSpec::cell_width(double s) const {
  const auto& g = spline_.grid();
  for (int i = 0; i + 1 < g.size(); ++i) {
    if (s <= g[i + 1] || i + 2 == g.size()) return g[i + 1] - g[i];
  }
  return g[1] - g[0];
}

Eigen::MatrixXd jacobian_path_derivative(const KinematicChain& chain,
                                         const PathSpec& path, double s,
                                         double h) {
  if (h <= 0.0) h = std::clamp(1e-5 * path.cell_width(s), 1e-7, 1e-4);
  const double hi = std::min(1.0, s + h);
  const double lo = std::max(0.0, s - h);
  Eigen::MatrixXd jp = body_jacobian(chain, path.position(hi));
  Eigen::MatrixXd jm = body_jacobian(chain, path.position(lo));
  return (jp - jm) / (hi - lo);
}

ToolMotion tool_motion(const KinematicChain& chain, const PathSpec& path,
                       double s, double sdot, double sddot, double gravity) {
  Eigen::VectorXd q = path.position(s);
  Eigen::VectorXd qp = path.first(s);
  Eigen::VectorXd qpp = path.second(s);
  Eigen::MatrixXd jac = body_jacobian(chain, q);
  Eigen::MatrixXd djac = jacobian_path_derivative(chain, path, s);
  RigidTransform tool = forward_kinematics(chain, q);

  const double sdot_sq = sdot * sdot;
  Eigen::VectorXd qdd = qp * sddot + qpp * sdot_sq;

  ToolMotion m;
  m.gravity_in_tool = tool.rotation().transpose() * Vec3(0, 0, -gravity);
  m.angular_velocity = jac.topRows<3>() * (qp * sdot);
  m.angular_acceleration =
      jac.topRows<3>() * qdd + djac.topRows<3>() * (qp * sdot_sq);
  m.linear_acceleration =
      jac.bottomRows<3>() * qdd + djac.bottomRows<3>() * (qp * sdot_sq);
  return m;
}

WrenchAffineForm parameterize_wrench(const KinematicChain& chain,
                                     const PathSpec& path,
                                     const ObjectModel& obj, double s,
                                     double gravity) {
  // The wrench is exactly affine in (sddot, sdot^2): extract the coefficients
  // by evaluating the Newton-Euler map at unit slices.
  Vec6 at_rest =
      newton_euler_tool_wrench(tool_motion(chain, path, s, 0, 0, gravity), obj)
          .vector();
  Vec6 unit_sddot =
      newton_euler_tool_wrench(tool_motion(chain, path, s, 0, 1, gravity), obj)
          .vector();
  Vec6 unit_sdot_sq =
      newton_euler_tool_wrench(tool_motion(chain, path, s, 1, 0, gravity), obj)
          .vector();

  WrenchAffineForm form;
  form.b_const = at_rest;
  form.b_ddot = unit_sddot - at_rest;
  form.b_dot = unit_sdot_sq - at_rest;
  return form;
}

}  // namespace mgfc
