#pragma once

#include <array>
#include <vector>

#include "mgfc/se3.hpp"

namespace mgfc {

// A cup wrench is represented by four point forces on the pad rim at
// 0/90/180/270 degrees in the cup's x-y plane.
inline constexpr int kRingPointCount = 4;

struct SuctionCup {
  RigidTransform pose_in_tool;  // T_t^i
  double pad_radius = 0.0;      // m
  double suction_force = 0.0;   // N

  std::array<Vec3, kRingPointCount> ring_points() const {
    const double r = pad_radius;
    return {Vec3(r, 0, 0), Vec3(0, r, 0), Vec3(-r, 0, 0), Vec3(0, -r, 0)};
  }
};

enum class CompressionTest { LessThan, GreaterThan };

// Diagonal inverse-stiffness weights for the load-distribution objective.
// A cup is switched to the compressed weights when its normal force crosses
// the threshold; the comparison direction is configurable because reaction
// sign conventions differ between data sources.
struct StiffnessWeights {
  Vec3 normal = Vec3::Ones();
  Vec3 compressed = Vec3::Ones();
  double compression_threshold = 0.0;  // N
  CompressionTest threshold_direction = CompressionTest::LessThan;

  bool is_compressed(double cup_normal_force) const {
    return threshold_direction == CompressionTest::LessThan
               ? cup_normal_force < compression_threshold
               : cup_normal_force > compression_threshold;
  }

  void validate() const;
};

// Weight preset fitted on the six-cup testbed data.
StiffnessWeights testbed_fitted_weights();

class GripperModel {
 public:
  GripperModel(std::vector<SuctionCup> cups, double friction,
               StiffnessWeights weights);

  const std::vector<SuctionCup>& cups() const { return cups_; }
  int cup_count() const { return static_cast<int>(cups_.size()); }
  double friction() const { return friction_; }
  const StiffnessWeights& weights() const { return weights_; }

  // Maximum |x| / |y| over cup centers in the tool frame.
  double polygon_extent_x() const { return extent_x_; }
  double polygon_extent_y() const { return extent_y_; }

  double total_suction_force() const;

  // Largest angle between a cup z axis and the tool z axis, in radians.
  double max_cup_tilt() const;

 private:
  std::vector<SuctionCup> cups_;
  double friction_;
  StiffnessWeights weights_;
  double extent_x_ = 0.0;
  double extent_y_ = 0.0;
};

// 6x12 map from stacked ring forces to the cup wrench:
// top rows are [p]x moment blocks, bottom rows identity force blocks.
Eigen::Matrix<double, 6, 12> ring_force_map(const SuctionCup& cup);

struct GripperMatrices {
  Eigen::MatrixXd ring_to_cup;   // 6N x 12N block diagonal
  Eigen::MatrixXd cup_to_tool;   // 6 x 6N stacked adjoint transposes
  Eigen::MatrixXd ring_to_tool;  // 6 x 12N product
};

// Throws DegenerateGripper when the ring forces cannot span a full wrench.
GripperMatrices assemble_distribution_matrices(const GripperModel& g);

// Per-cup suction-loss rows stacked block-diagonally: rows * F_bar <= rhs.
struct SuctionLossBlocks {
  Eigen::MatrixXd rows;  // 5N x 6N
  Eigen::VectorXd rhs;   // 5N
};
SuctionLossBlocks suction_loss_blocks(const GripperModel& g);

// 5x6 single-cup suction-loss rows (shared by blocks and tests).
Eigen::Matrix<double, 5, 6> suction_loss_rows(double pad_radius);

// Gripper-level slippage rows on the total tool wrench: rows * F_t <= rhs.
// Requires a planar gripper (all cup normals parallel to tool z).
struct SlippageBlock {
  Eigen::Matrix<double, 12, 6> rows;
  Eigen::Matrix<double, 12, 1> rhs;
};
SlippageBlock slippage_block(const GripperModel& g);

// Sum of per-cup suction wrenches transported to the tool frame.
Wrench total_suction_wrench(const GripperModel& g);

}  // namespace mgfc
