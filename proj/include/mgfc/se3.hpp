#pragma once

#include <Eigen/Dense>

#include "mgfc/errors.hpp"

namespace mgfc {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// [v]x such that skew(v) * w == v.cross(w).
Mat3 skew(const Vec3& v);

// Rigid transform T = (R, p). Construction validates R and re-orthonormalizes
// via polar decomposition when the drift exceeds 1e-8; drift beyond 1e-6 is an
// error rather than silently repaired.
class RigidTransform {
 public:
  RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return RigidTransform(); }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& point) const {
    return rotation_ * point + translation_;
  }

  RigidTransform inverse() const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

// [Ad_T] = [[R, 0], [[p]x R, R]]. Twists map directly (V_a = Ad(T_a^b) V_b);
// wrenches map through the transpose (F_a = Ad(T_b^a)^T F_b).
Mat6 adjoint(const RigidTransform& t);

// 6-vector ordering is (moment, force) throughout the project.
struct Wrench {
  Vec3 moment = Vec3::Zero();
  Vec3 force = Vec3::Zero();

  Wrench() = default;
  Wrench(const Vec3& m, const Vec3& f) : moment(m), force(f) {}
  explicit Wrench(const Vec6& v) : moment(v.head<3>()), force(v.tail<3>()) {}

  Vec6 vector() const {
    Vec6 v;
    v << moment, force;
    return v;
  }
};

// 6-vector ordering is (angular, linear).
struct Twist {
  Vec3 angular = Vec3::Zero();
  Vec3 linear = Vec3::Zero();

  Twist() = default;
  Twist(const Vec3& w, const Vec3& v) : angular(w), linear(v) {}
  explicit Twist(const Vec6& v) : angular(v.head<3>()), linear(v.tail<3>()) {}

  Vec6 vector() const {
    Vec6 v;
    v << angular, linear;
    return v;
  }
};

}  // namespace mgfc
