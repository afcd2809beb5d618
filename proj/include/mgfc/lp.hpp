#pragma once

#include <Eigen/Dense>
#include <limits>

#include "mgfc/errors.hpp"
#include "mgfc/parallel.hpp"

namespace mgfc::lp {

enum class Status { Optimal, Infeasible, Unbounded };

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// min c'x  s.t.  ineq_matrix x <= ineq_rhs,  eq_matrix x = eq_rhs,
// lower <= x <= upper (entries may be +-inf).
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::MatrixXd ineq_matrix;
  Eigen::VectorXd ineq_rhs;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static LinearProgram with_size(int n_vars) {
    LinearProgram p;
    p.objective = Eigen::VectorXd::Zero(n_vars);
    p.ineq_matrix.resize(0, n_vars);
    p.ineq_rhs.resize(0);
    p.eq_matrix.resize(0, n_vars);
    p.eq_rhs.resize(0);
    p.lower = Eigen::VectorXd::Constant(n_vars, -kInf);
    p.upper = Eigen::VectorXd::Constant(n_vars, kInf);
    return p;
  }
  int num_vars() const { return static_cast<int>(objective.size()); }
};

struct LpSolution {
  Status status = Status::Infeasible;
  Eigen::VectorXd x;
  double objective_value = 0.0;
  // Multipliers with the convention c + ineq' * ineq_duals + eq' * eq_duals
  // + bound terms = 0; ineq_duals >= 0 at an optimum. Valid when Optimal.
  Eigen::VectorXd ineq_duals;
  Eigen::VectorXd eq_duals;
  int iterations = 0;
};

struct SimplexOptions {
  double feas_tol = 1e-8;
  double cost_tol = 1e-9;
  double pivot_tol = 1e-10;
  ExecMode mode = ExecMode::Parallel;
  // Tableau element count below which pivots always run serially; the row
  // update is memory-bound and small tableaus lose to fork/join overhead.
  long long parallel_threshold = 1LL << 24;
};

// Dense two-phase bounded-variable simplex. Dantzig pricing, switching to
// Bland's rule after 10*(m+n) iterations; throws LpNumericalFailure past
// 50*(m+n). Deterministic: fixed tie-breaking, no randomization.
LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opt = {});

}  // namespace mgfc::lp
