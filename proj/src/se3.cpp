#include "mgfc/se3.hpp"

namespace mgfc {

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),  //
      v.z(), 0.0, -v.x(),   //
      -v.y(), v.x(), 0.0;
  return m;
}

namespace {

double rotation_drift(const Mat3& r) {
  double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  double det = std::abs(r.determinant() - 1.0);
  return std::max(ortho, det);
}

Mat3 polar_orthonormalize(const Mat3& r) {
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  Mat3 v = svd.matrixV();
  Mat3 q = u * v.transpose();
  if (q.determinant() < 0.0) {
    u.col(2) *= -1.0;
    q = u * v.transpose();
  }
  return q;
}

}  // namespace

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation_.allFinite() || !translation_.allFinite()) {
    throw Error("RigidTransform: non-finite entries");
  }
  double drift = rotation_drift(rotation_);
  if (drift > 1e-6) {
    throw Error("RigidTransform: rotation is not orthonormal (drift " +
                std::to_string(drift) + ")");
  }
  if (drift > 1e-8) {
    rotation_ = polar_orthonormalize(rotation_);
  }
}

RigidTransform RigidTransform::inverse() const {
  Mat3 rt = rotation_.transpose();
  return RigidTransform(rt, -(rt * translation_));
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return RigidTransform(a.rotation() * b.rotation(),
                        a.rotation() * b.translation() + a.translation());
}

Mat6 adjoint(const RigidTransform& t) {
  Mat6 ad = Mat6::Zero();
  ad.topLeftCorner<3, 3>() = t.rotation();
  ad.bottomLeftCorner<3, 3>() = skew(t.translation()) * t.rotation();
  ad.bottomRightCorner<3, 3>() = t.rotation();
  return ad;
}

}  // namespace mgfc
