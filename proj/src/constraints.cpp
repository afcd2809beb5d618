#include "mgfc/constraints.hpp"

namespace mgfc {

std::string RowLabel::to_string() const {
  std::string where = knot >= 0 ? "@k=" + std::to_string(knot) : "";
  switch (kind) {
    case Kind::SuctionLoss:
      return "suction-loss(cup " + std::to_string(cup) + ", row " +
             std::to_string(row) + ")" + where;
    case Kind::Slippage:
      return "slippage(row " + std::to_string(row) + ")" + where;
    case Kind::Velocity:
      return "velocity(joint " + std::to_string(joint) + ")" + where;
    case Kind::Acceleration:
      return "acceleration(joint " + std::to_string(joint) + ", " +
             (sign > 0 ? "+" : "-") + ")" + where;
    case Kind::Jerk:
      return "jerk(joint " + std::to_string(joint) + ", " +
             (sign > 0 ? "+" : "-") + ")" + where;
  }
  return "unknown";
}

DistributionMap distribution_map(const GripperModel& g,
                                 const WeightMatrix& weights) {
  return distribution_map(assemble_distribution_matrices(g), g, weights);
}

DistributionMap distribution_map(const GripperMatrices& mats,
                                 const GripperModel& g,
                                 const WeightMatrix& weights) {
  (void)g;
  DistributionMap map{.cup_map = {}, .ring_map = {}, .weights_used = weights};
  map.ring_map = ring_force_operator(mats, weights);
  map.cup_map = mats.ring_to_cup * map.ring_map;
  return map;
}

GraspBlocks make_grasp_blocks(const GripperModel& g) {
  return GraspBlocks{.mats = assemble_distribution_matrices(g),
                     .suction = suction_loss_blocks(g),
                     .slippage = slippage_block(g)};
}

ConstraintSet grasp_constraint_coeffs(const WrenchAffineForm& form,
                                      const GripperModel& g,
                                      const DistributionMap& map) {
  return grasp_constraint_coeffs(form, make_grasp_blocks(g), map);
}

ConstraintSet grasp_constraint_coeffs(const WrenchAffineForm& form,
                                      const GraspBlocks& blocks,
                                      const DistributionMap& map) {
  const int n_cups = static_cast<int>(blocks.suction.rhs.size()) / 5;
  const int m = 5 * n_cups + 12;

  // Suction-loss rows act on the distributed wrenches, slippage rows on the
  // total wrench; right-hand sides move into the constant term.
  Eigen::MatrixXd suction_on_tool = blocks.suction.rows * map.cup_map;  // 5N x 6

  ConstraintSet cs;
  cs.zeta_ddot.resize(m);
  cs.zeta_dot.resize(m);
  cs.zeta_const.resize(m);
  cs.zeta_ddot.head(5 * n_cups) = suction_on_tool * form.b_ddot;
  cs.zeta_dot.head(5 * n_cups) = suction_on_tool * form.b_dot;
  cs.zeta_const.head(5 * n_cups) =
      suction_on_tool * form.b_const - blocks.suction.rhs;
  cs.zeta_ddot.tail(12) = blocks.slippage.rows * form.b_ddot;
  cs.zeta_dot.tail(12) = blocks.slippage.rows * form.b_dot;
  cs.zeta_const.tail(12) =
      blocks.slippage.rows * form.b_const - blocks.slippage.rhs;

  cs.labels.reserve(m);
  for (int i = 0; i < n_cups; ++i) {
    for (int r = 0; r < 5; ++r) {
      cs.labels.push_back(
          {.kind = RowLabel::Kind::SuctionLoss, .cup = i, .row = r});
    }
  }
  for (int r = 0; r < 12; ++r) {
    cs.labels.push_back({.kind = RowLabel::Kind::Slippage, .row = r});
  }
  return cs;
}

DiscretizedRows discretize_constraints(const ConstraintSet& cs, double delta) {
  if (!(delta > 0.0)) throw Error("discretize_constraints: delta must be > 0");
  DiscretizedRows out;
  const Eigen::VectorXd half = cs.zeta_ddot / (2.0 * delta);
  out.coef_xk1 = half;
  out.coef_xk = cs.zeta_dot - half;
  out.rhs = -cs.zeta_const;
  return out;
}

std::vector<DistributionMap> nominal_weight_adjustment(
    const std::vector<WrenchAffineForm>& forms, const GripperModel& g,
    const Eigen::VectorXd& x_nominal, const Eigen::VectorXd& s_grid) {
  if (static_cast<int>(forms.size()) < s_grid.size() - 1 ||
      x_nominal.size() != s_grid.size()) {
    throw DimensionMismatch("nominal_weight_adjustment: grid size mismatch");
  }
  if (x_nominal.minCoeff() < 0.0) {
    throw Error("nominal_weight_adjustment: nominal must be nonnegative");
  }
  GripperMatrices mats = assemble_distribution_matrices(g);
  const StiffnessWeights& w = g.weights();
  DistributionMap normal_map = distribution_map(
      mats, g, WeightMatrix::uniform(w.normal, g.cup_count()));

  const int n_cells = static_cast<int>(s_grid.size()) - 1;
  std::vector<DistributionMap> maps;
  maps.reserve(n_cells);
  for (int k = 0; k < n_cells; ++k) {
    const double delta = s_grid[k + 1] - s_grid[k];
    const double sddot = (x_nominal[k + 1] - x_nominal[k]) / (2.0 * delta);
    Vec6 wrench = forms[k].evaluate(x_nominal[k], sddot);
    Eigen::VectorXd cups = normal_map.cup_map * wrench;

    std::vector<bool> flags(g.cup_count(), false);
    bool any = false;
    for (int i = 0; i < g.cup_count(); ++i) {
      flags[i] = w.is_compressed(cups[6 * i + 5]);
      any = any || flags[i];
    }
    if (!any) {
      maps.push_back(normal_map);
    } else {
      maps.push_back(
          distribution_map(mats, g, WeightMatrix::from_flags(w, flags)));
    }
  }
  return maps;
}

}  // namespace mgfc
