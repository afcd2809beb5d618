#include "mgfc/gripper.hpp"

#include <cmath>

namespace mgfc {

void StiffnessWeights::validate() const {
  if (!(normal.minCoeff() > 0.0) || !(compressed.minCoeff() > 0.0)) {
    throw Error("StiffnessWeights: all weight entries must be positive");
  }
  if (!std::isfinite(compression_threshold)) {
    throw Error("StiffnessWeights: non-finite threshold");
  }
}

StiffnessWeights testbed_fitted_weights() {
  StiffnessWeights w;
  w.normal = Vec3(1.0, 1.0, 2.3682);
  w.compressed = Vec3(0.8369, 0.8369, 0.1321);
  w.compression_threshold = -47.19;
  w.threshold_direction = CompressionTest::LessThan;
  return w;
}

GripperModel::GripperModel(std::vector<SuctionCup> cups, double friction,
                           StiffnessWeights weights)
    : cups_(std::move(cups)), friction_(friction), weights_(weights) {
  if (cups_.empty()) throw Error("GripperModel: needs at least one cup");
  if (!(friction_ > 0.0)) throw Error("GripperModel: friction must be > 0");
  weights_.validate();
  for (const auto& cup : cups_) {
    if (!(cup.pad_radius > 0.0)) {
      throw Error("GripperModel: pad_radius must be > 0");
    }
    if (!(cup.suction_force >= 0.0)) {
      throw Error("GripperModel: suction_force must be >= 0");
    }
    const Vec3& p = cup.pose_in_tool.translation();
    extent_x_ = std::max(extent_x_, std::abs(p.x()));
    extent_y_ = std::max(extent_y_, std::abs(p.y()));
  }
}

double GripperModel::total_suction_force() const {
  double sum = 0.0;
  for (const auto& cup : cups_) sum += cup.suction_force;
  return sum;
}

double GripperModel::max_cup_tilt() const {
  double worst = 0.0;
  for (const auto& cup : cups_) {
    Vec3 z = cup.pose_in_tool.rotation().col(2);
    double c = std::clamp(z.dot(Vec3::UnitZ()), -1.0, 1.0);
    worst = std::max(worst, std::acos(c));
  }
  return worst;
}

Eigen::Matrix<double, 6, 12> ring_force_map(const SuctionCup& cup) {
  Eigen::Matrix<double, 6, 12> map;
  const auto points = cup.ring_points();
  for (int j = 0; j < kRingPointCount; ++j) {
    map.block<3, 3>(0, 3 * j) = skew(points[j]);
    map.block<3, 3>(3, 3 * j) = Mat3::Identity();
  }
  return map;
}

GripperMatrices assemble_distribution_matrices(const GripperModel& g) {
  const int n = g.cup_count();
  GripperMatrices out;
  out.ring_to_cup = Eigen::MatrixXd::Zero(6 * n, 12 * n);
  out.cup_to_tool = Eigen::MatrixXd::Zero(6, 6 * n);
  for (int i = 0; i < n; ++i) {
    out.ring_to_cup.block<6, 12>(6 * i, 12 * i) = ring_force_map(g.cups()[i]);
    RigidTransform cup_from_tool = g.cups()[i].pose_in_tool.inverse();
    out.cup_to_tool.block<6, 6>(0, 6 * i) = adjoint(cup_from_tool).transpose();
  }
  out.ring_to_tool = out.cup_to_tool * out.ring_to_cup;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(out.ring_to_tool);
  qr.setThreshold(1e-10);
  if (qr.rank() < 6) {
    throw DegenerateGripper("gripper ring forces span only rank " +
                            std::to_string(qr.rank()) + " of 6");
  }
  return out;
}

Eigen::Matrix<double, 5, 6> suction_loss_rows(double pad_radius) {
  Eigen::Matrix<double, 5, 6> rows;
  const double r = pad_radius;
  rows << 0, 0, 0, 0, 0, -1,  //
      1, 1, 0, 0, 0, -r,      //
      1, -1, 0, 0, 0, -r,     //
      -1, 1, 0, 0, 0, -r,     //
      -1, -1, 0, 0, 0, -r;
  return rows;
}

SuctionLossBlocks suction_loss_blocks(const GripperModel& g) {
  const int n = g.cup_count();
  SuctionLossBlocks out;
  out.rows = Eigen::MatrixXd::Zero(5 * n, 6 * n);
  out.rhs = Eigen::VectorXd::Zero(5 * n);
  for (int i = 0; i < n; ++i) {
    const auto& cup = g.cups()[i];
    auto block = suction_loss_rows(cup.pad_radius);
    out.rows.block<5, 6>(5 * i, 6 * i) = block;
    // Fold the suction offset into the right-hand side:
    // U_s (F_i + psi e_6) <= 0  <=>  U_s F_i <= -U_s e_6 psi.
    Vec6 offset = Vec6::Zero();
    offset(5) = cup.suction_force;
    out.rhs.segment<5>(5 * i) = -(block * offset);
  }
  return out;
}

SlippageBlock slippage_block(const GripperModel& g) {
  if (g.max_cup_tilt() > 1e-6) {
    throw NonPlanarGripper(
        "slippage constraint requires all cup normals parallel to tool z");
  }
  const double mu = g.friction();
  const double x = g.polygon_extent_x();
  const double y = g.polygon_extent_y();
  const double mxy = mu * (x + y);

  SlippageBlock out;
  out.rows << 0, 0, 0, 1, 1, -mu,   //
      0, 0, 0, 1, -1, -mu,          //
      0, 0, 0, -1, 1, -mu,          //
      0, 0, 0, -1, -1, -mu,         //
      mu, mu, -1, -y, -x, -mxy,     //
      mu, -mu, -1, -y, x, -mxy,     //
      -mu, mu, -1, y, -x, -mxy,     //
      -mu, -mu, -1, y, x, -mxy,     //
      mu, mu, -1, y, x, -mxy,       //
      mu, -mu, -1, y, -x, -mxy,     //
      -mu, mu, -1, -y, x, -mxy,     //
      -mu, -mu, -1, -y, -x, -mxy;
  out.rhs = -(out.rows * total_suction_wrench(g).vector());
  return out;
}

Wrench total_suction_wrench(const GripperModel& g) {
  Vec6 sum = Vec6::Zero();
  for (const auto& cup : g.cups()) {
    Vec6 suction = Vec6::Zero();
    suction(5) = cup.suction_force;
    RigidTransform cup_from_tool = cup.pose_in_tool.inverse();
    sum += adjoint(cup_from_tool).transpose() * suction;
  }
  return Wrench(sum);
}

}  // namespace mgfc
