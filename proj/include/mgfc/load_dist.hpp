#pragma once

#include <vector>

#include "mgfc/gripper.hpp"
#include "mgfc/lp.hpp"

namespace mgfc {

// Block-diagonal inverse-stiffness weights: one positive 3-vector per cup,
// repeated over the four ring points.
class WeightMatrix {
 public:
  explicit WeightMatrix(std::vector<Vec3> per_cup);

  static WeightMatrix uniform(const Vec3& w, int cup_count);
  // Normal weights everywhere except the flagged cups.
  static WeightMatrix from_flags(const StiffnessWeights& w,
                                 const std::vector<bool>& compressed_flags);

  const std::vector<Vec3>& per_cup() const { return per_cup_; }
  int cup_count() const { return static_cast<int>(per_cup_.size()); }

  // Diagonal of W (12N) and of W^-1.
  Eigen::VectorXd diagonal() const;
  Eigen::VectorXd inverse_diagonal() const;

  bool operator==(const WeightMatrix& o) const { return per_cup_ == o.per_cup_; }

 private:
  std::vector<Vec3> per_cup_;
};

struct LoadDistribution {
  std::vector<Wrench> per_cup_wrench;
  Eigen::VectorXd ring_forces;  // 12N
  WeightMatrix weights_used;
  std::vector<bool> compressed_flags;
};

// Minimum-spring-energy distribution: ring forces minimizing f'Wf subject to
// the tool-wrench equality. Throws SingularSystem when A W^-1 A' is
// ill-conditioned beyond 1e12.
LoadDistribution solve_distribution(const Wrench& tool_wrench,
                                    const GripperModel& g,
                                    const WeightMatrix& weights);

// One-shot stiffness adjustment: solve with normal weights, flag cups whose
// normal force crosses the compression threshold, re-solve once with the
// flagged cups switched to the compressed weights.
LoadDistribution distribute_with_adjustment(const Wrench& tool_wrench,
                                            const GripperModel& g);
LoadDistribution distribute_with_adjustment(const Wrench& tool_wrench,
                                            const GripperModel& g,
                                            const StiffnessWeights& weights);

// L1 baseline: minimize ||f||_1 subject to the same equality, via the
// auxiliary-variable LP reformulation.
LoadDistribution solve_lp_distribution(const Wrench& tool_wrench,
                                       const GripperModel& g);

// 12N x 6 operator mapping a tool wrench to the optimal ring forces,
// W^-1 A' (A W^-1 A')^-1. Shared by the QP solve and the constraint stack.
Eigen::MatrixXd ring_force_operator(const GripperMatrices& mats,
                                    const WeightMatrix& weights);

}  // namespace mgfc
