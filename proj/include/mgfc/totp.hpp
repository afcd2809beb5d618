#pragma once

#include <optional>
#include <vector>

#include "mgfc/constraints.hpp"

namespace mgfc {

// Per-joint limits; an empty vector disables that order of constraint.
struct KinematicLimits {
  Eigen::VectorXd vel_max;   // rad/s
  Eigen::VectorXd acc_max;   // rad/s^2
  Eigen::VectorXd jerk_max;  // rad/s^3

  void validate(int dof) const;
  bool has_velocity() const { return vel_max.size() > 0; }
  bool has_acceleration() const { return acc_max.size() > 0; }
  bool has_jerk() const { return jerk_max.size() > 0; }
};

// One inequality over up to three consecutive profile variables:
// c0 x_k + c1 x_{k+1} + c2 x_{k+2} <= rhs.
struct LinearRow {
  int knot = 0;
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double rhs = 0.0;
  RowLabel label;

  double evaluate(const Eigen::VectorXd& x) const;
  double margin(const Eigen::VectorXd& x) const { return rhs - evaluate(x); }
};

std::vector<LinearRow> first_order_rows(const PathSpec& path,
                                        const KinematicLimits& limits,
                                        int knot, double s);
std::vector<LinearRow> second_order_rows(const PathSpec& path,
                                         const KinematicLimits& limits,
                                         int knot, double s, double delta);
// Jerk rows linearized about the nominal profile (sqrt factors frozen).
std::vector<LinearRow> third_order_rows(const PathSpec& path,
                                        const KinematicLimits& limits,
                                        int knot, const Eigen::VectorXd& grid,
                                        const Eigen::VectorXd& x_nominal);

// Gradient of f(x) = sum_k delta_k / (sqrt(x_k) + sqrt(x_{k+1})) at the
// nominal, with the floor guarding the 1/sqrt singularity. Entries for the
// pinned endpoints are zero.
Eigen::VectorXd linearized_cost(const Eigen::VectorXd& x_nominal,
                                const Eigen::VectorXd& grid,
                                double x_floor = 1e-6);

double path_time_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& grid);
Eigen::VectorXd timestamps_from_profile(const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& grid);

struct TotpProblem {
  PathSpec path;
  KinematicChain chain;
  KinematicLimits limits;
  std::optional<ObjectModel> object;
  std::optional<GripperModel> gripper;
  int n_knots = 100;  // segment count N; the profile has N+1 knots
  double epsilon = 1e-6;
  int max_iters = 50;
  double trust_radius = 100.0;  // absolute per-iteration move cap
  bool grasp_enabled = false;
  bool weight_adjustment_enabled = true;
  double x_floor = 1e-6;
  double gravity = kDefaultGravity;
  bool record_iterates = false;
  ExecMode mode = ExecMode::Parallel;
};

struct KnotMargin {
  double margin = 0.0;
  RowLabel label;
};

struct TotpSolution {
  Eigen::VectorXd x;           // N+1, x_0 = x_N = 0
  Eigen::VectorXd timestamps;  // N+1
  double total_time = 0.0;
  std::vector<KnotMargin> knot_margins;  // tightest row per knot
  double min_margin = 0.0;
  RowLabel min_margin_row;
  int iterations = 0;
  bool converged = false;
  // Populated when record_iterates: each LP solution along with the nominal
  // profile its rows were assembled from.
  std::vector<Eigen::VectorXd> iterates;
  std::vector<Eigen::VectorXd> iterate_nominals;
};

// Sequential linear programming per the discretized formulation; greedy
// kinematic initialization, per-variable trust boxes, one LP per iteration.
TotpSolution solve_totp(const TotpProblem& p);

// All constraint rows of the problem at a given nominal (kinematic rows plus
// discretized grasp rows and the rest-state rows at the final knot). Used for
// margin reporting and for verifying iterates independently of the LP.
std::vector<LinearRow> stacked_rows(const TotpProblem& p,
                                    const Eigen::VectorXd& x_nominal);

struct MaxLoadResult {
  double max_load_kg = 0.0;
  RowLabel binding_row;
};

// Largest object mass (uniform-density scaling) for which every grasp row
// holds along the fixed profile; bisection to 1e-3 kg.
MaxLoadResult max_load_search(const TotpProblem& p,
                              const Eigen::VectorXd& fixed_x);

}  // namespace mgfc
