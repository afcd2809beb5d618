// Compares the serial reference implementations against the OpenMP kernels
// and reports timings plus a result checksum for each.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "mgfc/io.hpp"
#include "mgfc/lp.hpp"

using namespace mgfc;

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(
             clock::now().time_since_epoch())
      .count();
}

struct BenchResult {
  double serial_ms = 0.0;
  double parallel_ms = 0.0;
  double serial_sum = 0.0;
  double parallel_sum = 0.0;
};

void report(const char* name, const BenchResult& r) {
  std::printf("%-28s serial %9.2f ms   openmp %9.2f ms   speedup %5.2fx   %s\n",
              name, r.serial_ms, r.parallel_ms,
              r.parallel_ms > 0 ? r.serial_ms / r.parallel_ms : 0.0,
              r.serial_sum == r.parallel_sum ? "results identical"
                                             : "RESULTS DIFFER");
}

KinematicChain bench_chain() {
  KinematicChain c;
  RevoluteJoint j1;
  j1.axis = Vec3::UnitZ();
  RevoluteJoint j2;
  j2.axis = Vec3::UnitY();
  j2.offset = RigidTransform(Mat3::Identity(), Vec3(0, 0, 0.5));
  RevoluteJoint j3;
  j3.axis = Vec3::UnitY();
  j3.offset = RigidTransform(Mat3::Identity(), Vec3(0.5, 0, 0));
  c.joints = {j1, j2, j3};
  c.tool_offset = RigidTransform(Mat3::Identity(), Vec3(0.5, 0, 0));
  return c;
}

// Per-knot wrench parameterization sweep, the planner's assembly kernel.
BenchResult bench_knot_assembly(int n_knots) {
  auto chain = bench_chain();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  Eigen::MatrixXd knots(6, 3);
  for (int r = 0; r < 6; ++r) {
    for (int j = 0; j < 3; ++j) knots(r, j) = u(rng);
  }
  PathSpec path(Eigen::VectorXd::LinSpaced(6, 0.0, 1.0), knots);
  ObjectModel obj = ObjectModel::box(8.0, Vec3(0.3, 0.3, 0.2), Vec3(0, 0, 0.1));

  BenchResult res;
  std::vector<WrenchAffineForm> forms(n_knots + 1);
  for (ExecMode mode : {ExecMode::Serial, ExecMode::Parallel}) {
    const double t0 = now_ms();
    par::for_index(n_knots + 1, mode, [&](std::ptrdiff_t k) {
      const double s = static_cast<double>(k) / n_knots;
      forms[k] = parameterize_wrench(chain, path, obj, s);
    });
    const double t1 = now_ms();
    double sum = 0.0;
    for (const auto& f : forms) sum += f.b_dot.sum() + f.b_const.sum();
    if (mode == ExecMode::Serial) {
      res.serial_ms = t1 - t0;
      res.serial_sum = sum;
    } else {
      res.parallel_ms = t1 - t0;
      res.parallel_sum = sum;
    }
  }
  return res;
}

// Dense simplex on a TOPP-shaped LP; exercises the pivot row-update kernel.
BenchResult bench_simplex(int n_vars) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  lp::LinearProgram prog = lp::LinearProgram::with_size(n_vars);
  for (int v = 0; v < n_vars; ++v) {
    prog.objective[v] = -1.0 - 0.001 * (v % 7);
    prog.lower[v] = 0.0;
    prog.upper[v] = 10.0;
  }
  // Banded difference rows, like the discretized acceleration limits.
  const int m = 2 * (n_vars - 1);
  prog.ineq_matrix = Eigen::MatrixXd::Zero(m, n_vars);
  prog.ineq_rhs.resize(m);
  for (int k = 0; k + 1 < n_vars; ++k) {
    const double step = 0.02 * u(rng);
    prog.ineq_matrix(2 * k, k) = -1.0;
    prog.ineq_matrix(2 * k, k + 1) = 1.0;
    prog.ineq_rhs[2 * k] = step;
    prog.ineq_matrix(2 * k + 1, k) = 1.0;
    prog.ineq_matrix(2 * k + 1, k + 1) = -1.0;
    prog.ineq_rhs[2 * k + 1] = step;
  }

  BenchResult res;
  for (ExecMode mode : {ExecMode::Serial, ExecMode::Parallel}) {
    lp::SimplexOptions opt;
    opt.mode = mode;
    opt.parallel_threshold = 0;  // force the kernel under comparison
    const double t0 = now_ms();
    auto sol = lp::solve_lp(prog, opt);
    const double t1 = now_ms();
    const double sum = sol.x.sum() + sol.objective_value;
    if (mode == ExecMode::Serial) {
      res.serial_ms = t1 - t0;
      res.serial_sum = sum;
    } else {
      res.parallel_ms = t1 - t0;
      res.parallel_sum = sum;
    }
  }
  return res;
}

// End-to-end grasp-constrained planner solve; the per-knot assembly is the
// parallel part, the sequential SLP/LP loop is shared.
BenchResult bench_solver(int n_knots) {
  auto gripper_cups = [] {
    std::vector<SuctionCup> cups;
    for (int ix = 0; ix < 3; ++ix) {
      for (int iy = 0; iy < 2; ++iy) {
        SuctionCup cup;
        cup.pose_in_tool = RigidTransform(
            Mat3::Identity(),
            Vec3((ix - 1) * 0.1, (iy - 0.5) * 0.1, 0.0));
        cup.pad_radius = 0.03;
        cup.suction_force = 118.6;
        cups.push_back(cup);
      }
    }
    return cups;
  };

  BenchResult res;
  for (ExecMode mode : {ExecMode::Serial, ExecMode::Parallel}) {
    Eigen::MatrixXd knots(5, 3);
    knots << 0.0, 0.0, 0.0,  //
        0.3, 0.15, -0.15,    //
        0.6, 0.3, -0.3,      //
        0.9, 0.15, -0.15,    //
        1.2, 0.0, 0.0;
    KinematicLimits lim;
    lim.vel_max = Eigen::VectorXd::Constant(3, 3.0);
    lim.acc_max = Eigen::VectorXd::Constant(3, 8.0);
    TotpProblem p{.path = PathSpec(Eigen::VectorXd::LinSpaced(5, 0.0, 1.0),
                                   knots),
                  .chain = bench_chain(),
                  .limits = lim};
    p.object = ObjectModel::box(12.0, Vec3(0.4, 0.4, 0.3), Vec3(0, 0, 0.15));
    p.gripper = GripperModel(gripper_cups(), 0.7, testbed_fitted_weights());
    p.grasp_enabled = true;
    p.n_knots = n_knots;
    p.mode = mode;
    const double t0 = now_ms();
    auto sol = solve_totp(p);
    const double t1 = now_ms();
    const double sum = sol.total_time + sol.x.sum();
    if (mode == ExecMode::Serial) {
      res.serial_ms = t1 - t0;
      res.serial_sum = sum;
    } else {
      res.parallel_ms = t1 - t0;
      res.parallel_sum = sum;
    }
  }
  return res;
}

}  // namespace

int main(int argc, char** argv) {
  int knots = 4000;
  int lp_vars = 400;
  int solver_knots = 400;
  if (argc > 1) knots = std::atoi(argv[1]);
  if (argc > 2) lp_vars = std::atoi(argv[2]);
  if (argc > 3) solver_knots = std::atoi(argv[3]);

  std::printf("threads available: %d\n", par::max_threads());
  report("knot wrench assembly", bench_knot_assembly(knots));
  report("simplex pivot kernel", bench_simplex(lp_vars));
  report("totp solve", bench_solver(solver_knots));
  return 0;
}
