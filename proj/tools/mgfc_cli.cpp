#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "mgfc/io.hpp"

namespace {

using namespace mgfc;

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitSingular = 3;
constexpr int kExitStaticInfeasible = 4;
constexpr int kExitNotConverged = 5;
constexpr int kExitInsufficientData = 6;

std::string fmt(double v) { return io::format_number(v); }

void print_distribution(const LoadDistribution& ld, std::ostream& out) {
  out << "cup,m_x,m_y,m_z,f_x,f_y,f_z,compressed\n";
  for (std::size_t i = 0; i < ld.per_cup_wrench.size(); ++i) {
    const Vec6 w = ld.per_cup_wrench[i].vector();
    out << i;
    for (int c = 0; c < 6; ++c) out << "," << fmt(w[c]);
    out << "," << (ld.compressed_flags[i] ? 1 : 0) << "\n";
  }
  out << "ring_point,f_x,f_y,f_z\n";
  for (int p = 0; p * 3 < ld.ring_forces.size(); ++p) {
    out << p << "," << fmt(ld.ring_forces[3 * p]) << ","
        << fmt(ld.ring_forces[3 * p + 1]) << ","
        << fmt(ld.ring_forces[3 * p + 2]) << "\n";
  }
}

int support_size(const Eigen::VectorXd& f) {
  const double cutoff = 0.01 * f.cwiseAbs().maxCoeff();
  int n = 0;
  for (int i = 0; i < f.size(); ++i) {
    if (std::abs(f[i]) > cutoff) ++n;
  }
  return n;
}

int cmd_distribute(const std::string& gripper_file,
                   const std::vector<double>& wrench, bool use_lp,
                   bool use_adjusted, bool compare,
                   const std::string& csv_out) {
  GripperModel g = io::load_gripper(gripper_file);
  if (wrench.size() != 6) {
    throw ParseError("--wrench needs 6 numbers (m_x m_y m_z f_x f_y f_z)");
  }
  Wrench tool(Vec6(Eigen::Map<const Vec6>(wrench.data())));

  LoadDistribution ld =
      use_lp ? solve_lp_distribution(tool, g)
      : use_adjusted
          ? distribute_with_adjustment(tool, g)
          : solve_distribution(tool, g,
                               WeightMatrix::uniform(g.weights().normal,
                                                     g.cup_count()));
  print_distribution(ld, std::cout);

  if (compare) {
    auto qp = solve_distribution(
        tool, g, WeightMatrix::uniform(g.weights().normal, g.cup_count()));
    auto lp = solve_lp_distribution(tool, g);
    const auto wdiag = qp.weights_used.diagonal();
    std::cout << "compare,qp_support," << support_size(qp.ring_forces)
              << ",lp_support," << support_size(lp.ring_forces)
              << ",qp_l1," << fmt(qp.ring_forces.lpNorm<1>()) << ",lp_l1,"
              << fmt(lp.ring_forces.lpNorm<1>()) << ",qp_energy,"
              << fmt(qp.ring_forces.dot(wdiag.asDiagonal() * qp.ring_forces))
              << ",lp_energy,"
              << fmt(lp.ring_forces.dot(wdiag.asDiagonal() * lp.ring_forces))
              << "\n";
  }
  if (!csv_out.empty()) {
    std::ofstream out(csv_out);
    if (!out) throw Error(csv_out + ": cannot open for writing");
    print_distribution(ld, out);
  }
  return kExitOk;
}

void write_plan_summary(const std::string& path, double total_time,
                        int iterations, bool converged, double min_margin,
                        bool statically_infeasible) {
  std::string text = std::string("{\n") +
                     "  \"total_time_s\": " + fmt(total_time) + ",\n" +
                     "  \"iterations\": " + std::to_string(iterations) + ",\n" +
                     "  \"converged\": " + (converged ? "true" : "false") +
                     ",\n" + "  \"min_margin\": " + fmt(min_margin) + ",\n" +
                     "  \"statically_infeasible\": " +
                     (statically_infeasible ? "true" : "false") + "\n}\n";
  if (path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(path);
    if (!out) throw Error(path + ": cannot open for writing");
    out << text;
  }
}

int cmd_plan(const std::string& scenario_file, const std::string& csv_out,
             const std::string& summary_out, int grasp_override) {
  io::Scenario sc = io::load_scenario(scenario_file);
  if (grasp_override >= 0) sc.solver.grasp_enabled = grasp_override != 0;
  TotpProblem p = io::make_problem(std::move(sc));

  TotpSolution sol;
  try {
    sol = solve_totp(p);
  } catch (const StaticallyInfeasible& e) {
    std::cerr << "statically infeasible: " << e.what() << "\n";
    write_plan_summary(summary_out, 0.0, 0, false,
                       -std::numeric_limits<double>::infinity(), true);
    return kExitStaticInfeasible;
  }

  const int n = p.n_knots;
  Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(n + 1, 0.0, 1.0);
  std::vector<io::TrajectoryRow> rows(n + 1);
  for (int k = 0; k <= n; ++k) {
    io::TrajectoryRow& r = rows[k];
    r.k = k;
    r.s = grid[k];
    r.x = sol.x[k];
    r.sdot = std::sqrt(std::max(0.0, sol.x[k]));
    const double delta = 1.0 / n;
    r.sddot = k < n ? (sol.x[k + 1] - sol.x[k]) / (2.0 * delta)
                    : (sol.x[k] - sol.x[k - 1]) / (2.0 * delta);
    r.t = sol.timestamps[k];
    r.q = p.path.position(r.s);
    Eigen::VectorXd qp = p.path.first(r.s);
    Eigen::VectorXd qpp = p.path.second(r.s);
    r.qd = qp * r.sdot;
    r.qdd = qpp * r.x + qp * r.sddot;
    r.min_margin = sol.knot_margins[k].margin;
    r.active_row_label = sol.knot_margins[k].label.to_string();
  }
  if (!csv_out.empty()) io::write_trajectory_csv(csv_out, rows, p.path.dof());
  write_plan_summary(summary_out, sol.total_time, sol.iterations,
                     sol.converged, sol.min_margin, false);
  return sol.converged ? kExitOk : kExitNotConverged;
}

int cmd_maxload(const std::string& scenario_file,
                const std::string& trajectory_csv,
                const std::string& json_out) {
  io::Scenario sc = io::load_scenario(scenario_file);
  io::TrajectoryProfile prof = io::read_trajectory_csv(trajectory_csv);
  const int n = static_cast<int>(prof.x.size()) - 1;
  for (int k = 0; k <= n; ++k) {
    const double expect = static_cast<double>(k) / n;
    if (std::abs(prof.s[k] - expect) > 1e-9) {
      throw ParseError(trajectory_csv + ": s column must be a uniform grid");
    }
    if (prof.x[k] < -1e-12) {
      throw ParseError(trajectory_csv + ": x column must be nonnegative");
    }
  }
  sc.solver.n_knots = n;
  sc.solver.grasp_enabled = true;
  TotpProblem p = io::make_problem(std::move(sc));
  auto res = max_load_search(p, prof.x.cwiseMax(0.0));

  std::string text = std::string("{\n") +
                     "  \"max_load_kg\": " + fmt(res.max_load_kg) + ",\n" +
                     "  \"active_row_label\": \"" +
                     res.binding_row.to_string() + "\"\n}\n";
  if (json_out.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(json_out);
    if (!out) throw Error(json_out + ": cannot open for writing");
    out << text;
  }
  return kExitOk;
}

int cmd_fitweights(const std::string& dataset_file,
                   const std::string& gripper_file, std::uint64_t seed,
                   bool full_wrench, const std::string& json_out,
                   const std::string& residuals_out) {
  GripperModel g = io::load_gripper(gripper_file);
  auto samples = io::load_dataset(dataset_file, g.cup_count());
  FitOptions opt;
  opt.seed = seed;
  opt.full_wrench = full_wrench;
  FitResult fit = fit_weights(samples, g, opt);

  const auto& w = fit.weights;
  std::string text =
      std::string("{\n") + "  \"w_normal\": [" + fmt(w.normal.x()) + ", " +
      fmt(w.normal.y()) + ", " + fmt(w.normal.z()) + "],\n" +
      "  \"w_compressed\": [" + fmt(w.compressed.x()) + ", " +
      fmt(w.compressed.y()) + ", " + fmt(w.compressed.z()) + "],\n" +
      "  \"fz_threshold_N\": " + fmt(w.compression_threshold) + ",\n" +
      "  \"objective\": " + fmt(fit.objective) + ",\n" +
      "  \"degenerate\": " + (fit.degenerate ? "true" : "false") + ",\n" +
      "  \"seed\": " + std::to_string(seed) + "\n}\n";
  if (json_out.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(json_out);
    if (!out) throw Error(json_out + ": cannot open for writing");
    out << text;
  }
  if (!residuals_out.empty()) {
    std::ofstream out(residuals_out);
    if (!out) throw Error(residuals_out + ": cannot open for writing");
    out << "sample,residual\n";
    for (int i = 0; i < fit.per_sample_residuals.size(); ++i) {
      out << i << "," << fmt(fit.per_sample_residuals[i]) << "\n";
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Load distribution, grasp-failure constraints, and grasp-constrained "
      "time-optimal path parameterization for multi-suction-cup grippers"};
  app.require_subcommand(1);

  // distribute
  std::string gripper_file, csv_out;
  std::vector<double> wrench;
  bool use_lp = false, use_qp = false, use_adjusted = false, compare = false;
  auto* dist = app.add_subcommand(
      "distribute", "Distribute a tool wrench across the suction cups");
  dist->add_option("--gripper", gripper_file, "Gripper config JSON")
      ->required();
  dist->add_option("--wrench", wrench,
                   "Tool wrench: m_x m_y m_z f_x f_y f_z")
      ->expected(6)
      ->required();
  dist->add_flag("--lp", use_lp, "L1 (linear program) distribution");
  dist->add_flag("--qp", use_qp, "Minimum-energy distribution (default)");
  dist->add_flag("--adjusted", use_adjusted,
                 "One-shot stiffness-adjusted distribution");
  dist->add_flag("--compare", compare, "Print QP vs LP support and norms");
  dist->add_option("--csv", csv_out, "Also write the table to this file");

  // plan
  std::string scenario_file, traj_out, summary_out;
  int grasp_override = -1;
  auto* plan = app.add_subcommand(
      "plan", "Solve the grasp-constrained time-optimal parameterization");
  plan->add_option("--scenario", scenario_file, "Scenario JSON")->required();
  plan->add_option("--csv", traj_out, "Trajectory CSV output path");
  plan->add_option("--summary", summary_out,
                   "Summary JSON output path (stdout when omitted)");
  plan->add_flag_callback("--grasp", [&] { grasp_override = 1; },
                          "Force grasp constraints on");
  plan->add_flag_callback("--no-grasp", [&] { grasp_override = 0; },
                          "Force grasp constraints off");

  // maxload
  std::string ml_scenario, ml_traj, ml_json;
  auto* maxload = app.add_subcommand(
      "maxload", "Largest securely graspable mass along a fixed trajectory");
  maxload->add_option("--scenario", ml_scenario, "Scenario JSON")->required();
  maxload->add_option("--trajectory", ml_traj, "Trajectory CSV from 'plan'")
      ->required();
  maxload->add_option("--json", ml_json, "JSON output path");

  // fitweights
  std::string ds_file, fw_gripper, fw_json, fw_residuals;
  std::uint64_t seed = 0;
  bool full_wrench = false;
  auto* fitw = app.add_subcommand(
      "fitweights", "Fit stiffness weights to a wrench dataset");
  fitw->add_option("--dataset", ds_file, "Sample dataset CSV")->required();
  fitw->add_option("--gripper", fw_gripper, "Gripper config JSON")->required();
  fitw->add_option("--seed", seed, "Multi-start RNG seed");
  fitw->add_flag("--full-wrench", full_wrench,
                 "Fit on all six wrench components instead of forces only");
  fitw->add_option("--json", fw_json, "JSON output path");
  fitw->add_option("--residuals", fw_residuals, "Per-sample residual CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (dist->parsed()) {
      if (use_lp && (use_qp || use_adjusted)) {
        throw ParseError("pick one of --lp, --qp, --adjusted");
      }
      return cmd_distribute(gripper_file, wrench, use_lp, use_adjusted,
                            compare, csv_out);
    }
    if (plan->parsed()) {
      return cmd_plan(scenario_file, traj_out, summary_out, grasp_override);
    }
    if (maxload->parsed()) {
      return cmd_maxload(ml_scenario, ml_traj, ml_json);
    }
    if (fitw->parsed()) {
      return cmd_fitweights(ds_file, fw_gripper, seed, full_wrench, fw_json,
                            fw_residuals);
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const SingularSystem& e) {
    std::cerr << "singular system: " << e.what() << "\n";
    return kExitSingular;
  } catch (const StaticallyInfeasible& e) {
    std::cerr << "statically infeasible: " << e.what() << "\n";
    return kExitStaticInfeasible;
  } catch (const LpInfeasible& e) {
    std::cerr << "infeasible along the path: " << e.what() << "\n";
    return kExitStaticInfeasible;
  } catch (const InsufficientData& e) {
    std::cerr << "insufficient data: " << e.what() << "\n";
    return kExitInsufficientData;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
