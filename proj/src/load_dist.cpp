#include "mgfc/load_dist.hpp"

#include <cmath>

namespace mgfc {

WeightMatrix::WeightMatrix(std::vector<Vec3> per_cup)
    : per_cup_(std::move(per_cup)) {
  if (per_cup_.empty()) throw Error("WeightMatrix: no cups");
  for (const auto& w : per_cup_) {
    if (!(w.minCoeff() > 0.0)) {
      throw Error("WeightMatrix: diagonal entries must be positive");
    }
  }
}

WeightMatrix WeightMatrix::uniform(const Vec3& w, int cup_count) {
  return WeightMatrix(std::vector<Vec3>(cup_count, w));
}

WeightMatrix WeightMatrix::from_flags(const StiffnessWeights& w,
                                      const std::vector<bool>& flags) {
  std::vector<Vec3> per_cup(flags.size());
  for (std::size_t i = 0; i < flags.size(); ++i) {
    per_cup[i] = flags[i] ? w.compressed : w.normal;
  }
  return WeightMatrix(std::move(per_cup));
}

Eigen::VectorXd WeightMatrix::diagonal() const {
  Eigen::VectorXd d(12 * cup_count());
  for (int i = 0; i < cup_count(); ++i) {
    for (int j = 0; j < kRingPointCount; ++j) {
      d.segment<3>(12 * i + 3 * j) = per_cup_[i];
    }
  }
  return d;
}

Eigen::VectorXd WeightMatrix::inverse_diagonal() const {
  return diagonal().cwiseInverse();
}

Eigen::MatrixXd ring_force_operator(const GripperMatrices& mats,
                                    const WeightMatrix& weights) {
  const Eigen::MatrixXd& a = mats.ring_to_tool;
  Eigen::VectorXd winv = weights.inverse_diagonal();
  if (winv.size() != a.cols()) {
    throw DimensionMismatch("ring_force_operator: weight/gripper mismatch");
  }
  Eigen::MatrixXd winv_at = winv.asDiagonal() * a.transpose();  // 12N x 6
  Mat6 gram = a * winv_at;

  Eigen::SelfAdjointEigenSolver<Mat6> eig(gram);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) {
    throw SingularSystem("A W^-1 A' condition number exceeds 1e12");
  }
  return winv_at * gram.llt().solve(Mat6::Identity());
}

namespace {

LoadDistribution from_ring_forces(const GripperMatrices& mats,
                                  const Eigen::VectorXd& ring_forces,
                                  WeightMatrix weights) {
  LoadDistribution out{.per_cup_wrench = {},
                       .ring_forces = ring_forces,
                       .weights_used = std::move(weights),
                       .compressed_flags = {}};
  Eigen::VectorXd cup_stack = mats.ring_to_cup * ring_forces;
  const int n = static_cast<int>(cup_stack.size()) / 6;
  out.per_cup_wrench.reserve(n);
  for (int i = 0; i < n; ++i) {
    out.per_cup_wrench.emplace_back(Vec6(cup_stack.segment<6>(6 * i)));
  }
  out.compressed_flags.assign(n, false);
  return out;
}

}  // namespace

LoadDistribution solve_distribution(const Wrench& tool_wrench,
                                    const GripperModel& g,
                                    const WeightMatrix& weights) {
  GripperMatrices mats = assemble_distribution_matrices(g);
  Eigen::VectorXd f = ring_force_operator(mats, weights) * tool_wrench.vector();
  return from_ring_forces(mats, f, weights);
}

LoadDistribution distribute_with_adjustment(const Wrench& tool_wrench,
                                            const GripperModel& g) {
  return distribute_with_adjustment(tool_wrench, g, g.weights());
}

LoadDistribution distribute_with_adjustment(const Wrench& tool_wrench,
                                            const GripperModel& g,
                                            const StiffnessWeights& weights) {
  weights.validate();
  LoadDistribution first = solve_distribution(
      tool_wrench, g, WeightMatrix::uniform(weights.normal, g.cup_count()));

  std::vector<bool> flags(g.cup_count(), false);
  bool any = false;
  for (int i = 0; i < g.cup_count(); ++i) {
    flags[i] = weights.is_compressed(first.per_cup_wrench[i].force.z());
    any = any || flags[i];
  }
  if (!any) return first;

  LoadDistribution second = solve_distribution(
      tool_wrench, g, WeightMatrix::from_flags(weights, flags));
  second.compressed_flags = flags;
  return second;
}

LoadDistribution solve_lp_distribution(const Wrench& tool_wrench,
                                       const GripperModel& g) {
  GripperMatrices mats = assemble_distribution_matrices(g);
  const int nf = static_cast<int>(mats.ring_to_tool.cols());  // 12N

  // Variables [f; x] with x >= |f| and objective sum(x).
  lp::LinearProgram prog = lp::LinearProgram::with_size(2 * nf);
  prog.objective.tail(nf).setOnes();
  prog.eq_matrix = Eigen::MatrixXd::Zero(6, 2 * nf);
  prog.eq_matrix.leftCols(nf) = mats.ring_to_tool;
  prog.eq_rhs = tool_wrench.vector();
  prog.ineq_matrix = Eigen::MatrixXd::Zero(2 * nf, 2 * nf);
  prog.ineq_matrix.topLeftCorner(nf, nf) = -Eigen::MatrixXd::Identity(nf, nf);
  prog.ineq_matrix.topRightCorner(nf, nf) = -Eigen::MatrixXd::Identity(nf, nf);
  prog.ineq_matrix.bottomLeftCorner(nf, nf) = Eigen::MatrixXd::Identity(nf, nf);
  prog.ineq_matrix.bottomRightCorner(nf, nf) =
      -Eigen::MatrixXd::Identity(nf, nf);
  prog.ineq_rhs = Eigen::VectorXd::Zero(2 * nf);
  prog.lower.tail(nf).setZero();

  lp::LpSolution sol = lp::solve_lp(prog);
  if (sol.status != lp::Status::Optimal) {
    throw LpInternalError(
        "L1 distribution LP did not solve to optimality (status " +
        std::to_string(static_cast<int>(sol.status)) + ")");
  }
  return from_ring_forces(mats, sol.x.head(nf),
                          WeightMatrix::uniform(Vec3::Ones(), g.cup_count()));
}

}  // namespace mgfc
