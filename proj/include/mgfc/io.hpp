#pragma once

#include <string>
#include <vector>

#include "mgfc/calib.hpp"
#include "mgfc/totp.hpp"

namespace mgfc::io {

// All config files are JSON. Loaders throw ParseError naming the file and
// the offending key.

GripperModel load_gripper(const std::string& path);
ObjectModel load_object(const std::string& path);
KinematicChain load_chain(const std::string& path);
PathSpec load_path(const std::string& path);
KinematicLimits load_limits(const std::string& path);

struct SolverOptions {
  int n_knots = 100;
  double epsilon = 1e-6;
  int max_iters = 50;
  double trust_radius = 100.0;
  bool grasp_enabled = true;
  bool weight_adjustment_enabled = true;
};

struct Scenario {
  GripperModel gripper;
  ObjectModel object;
  KinematicChain chain;
  PathSpec path;
  KinematicLimits limits;
  SolverOptions solver;
};

// Scenario file referencing the other documents; relative paths resolve
// against the scenario file's directory.
Scenario load_scenario(const std::string& path);

TotpProblem make_problem(Scenario scenario);

// Calibration dataset: a `cups,N` header row, then one comma-separated row
// per sample with 6 tool-wrench columns followed by 6 columns per cup,
// ordered (m_x, m_y, m_z, f_x, f_y, f_z).
std::vector<WrenchSample> load_dataset(const std::string& path,
                                       int expected_cups);
void write_dataset(const std::string& path,
                   const std::vector<WrenchSample>& samples);

// 12 significant digits, deterministic across runs.
std::string format_number(double v);

struct TrajectoryRow {
  int k = 0;
  double s = 0.0;
  double x = 0.0;
  double sdot = 0.0;
  double sddot = 0.0;
  double t = 0.0;
  Eigen::VectorXd q, qd, qdd;
  double min_margin = 0.0;
  std::string active_row_label;
};

void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectoryRow>& rows, int dof);

// Reads back the columns needed by the max-load command (k, s, x).
struct TrajectoryProfile {
  Eigen::VectorXd s;
  Eigen::VectorXd x;
};
TrajectoryProfile read_trajectory_csv(const std::string& path);

}  // namespace mgfc::io
