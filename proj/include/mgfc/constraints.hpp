#pragma once

#include <string>
#include <vector>

#include "mgfc/dynamics.hpp"
#include "mgfc/load_dist.hpp"

namespace mgfc {

// Provenance tag for a constraint row, so the planner can report which cup
// and failure mode limits the motion.
struct RowLabel {
  enum class Kind { SuctionLoss, Slippage, Velocity, Acceleration, Jerk };
  Kind kind = Kind::SuctionLoss;
  int knot = -1;
  int cup = -1;    // suction-loss rows
  int row = -1;    // sub-row within the block
  int joint = -1;  // kinematic rows
  int sign = +1;   // kinematic rows: which side of the limit

  std::string to_string() const;
};

// Tool-wrench-to-per-cup-wrench operator for a fixed weight matrix:
// M_W = A_s W^-1 A' (A W^-1 A')^-1, with A_g * M_W = I by construction.
struct DistributionMap {
  Eigen::MatrixXd cup_map;   // 6N x 6
  Eigen::MatrixXd ring_map;  // 12N x 6
  WeightMatrix weights_used;
};

DistributionMap distribution_map(const GripperModel& g,
                                 const WeightMatrix& weights);
DistributionMap distribution_map(const GripperMatrices& mats,
                                 const GripperModel& g,
                                 const WeightMatrix& weights);

// Grasp-failure rows as affine functions of (sddot, sdot^2):
// zeta_ddot * sddot + zeta_dot * sdot^2 + zeta_const <= 0.
// Rows are the per-cup suction-loss blocks followed by the slippage block.
struct ConstraintSet {
  Eigen::VectorXd zeta_ddot;
  Eigen::VectorXd zeta_dot;
  Eigen::VectorXd zeta_const;
  std::vector<RowLabel> labels;

  int rows() const { return static_cast<int>(zeta_const.size()); }
  Eigen::VectorXd evaluate(double sdot_sq, double sddot) const {
    return zeta_ddot * sddot + zeta_dot * sdot_sq + zeta_const;
  }
};

// Constant gripper-side blocks, assembled once per gripper.
struct GraspBlocks {
  GripperMatrices mats;
  SuctionLossBlocks suction;
  SlippageBlock slippage;
};
GraspBlocks make_grasp_blocks(const GripperModel& g);

ConstraintSet grasp_constraint_coeffs(const WrenchAffineForm& form,
                                      const GripperModel& g,
                                      const DistributionMap& map);
ConstraintSet grasp_constraint_coeffs(const WrenchAffineForm& form,
                                      const GraspBlocks& blocks,
                                      const DistributionMap& map);

// Eq-16 discretization: evaluating coef_xk * x_k + coef_xk1 * x_{k+1} <= rhs
// equals evaluating the continuous rows at sdot^2 = x_k,
// sddot = (x_{k+1} - x_k) / (2 delta).
struct DiscretizedRows {
  Eigen::VectorXd coef_xk;
  Eigen::VectorXd coef_xk1;
  Eigen::VectorXd rhs;
};
DiscretizedRows discretize_constraints(const ConstraintSet& cs, double delta);

// Per-knot distribution maps for one SLP iteration: distribute the nominal
// wrench with normal weights, flag compressed cups, and return the adjusted
// map per knot (knots 0..N-1; knot k pairs x_k with x_{k+1}).
std::vector<DistributionMap> nominal_weight_adjustment(
    const std::vector<WrenchAffineForm>& forms, const GripperModel& g,
    const Eigen::VectorXd& x_nominal, const Eigen::VectorXd& s_grid);

}  // namespace mgfc
