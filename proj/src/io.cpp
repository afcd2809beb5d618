#include "mgfc/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mgfc::io {

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

const json& require(const json& j, const std::string& key,
                    const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError(ctx + ": missing key '" + key + "'");
  }
  return j.at(key);
}

double as_number(const json& j, const std::string& ctx) {
  if (!j.is_number()) throw ParseError(ctx + ": expected a number");
  return j.get<double>();
}

Vec3 as_vec3(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 3) {
    throw ParseError(ctx + ": expected an array of 3 numbers");
  }
  return Vec3(as_number(j[0], ctx), as_number(j[1], ctx), as_number(j[2], ctx));
}

Eigen::VectorXd as_vector(const json& j, const std::string& ctx) {
  if (!j.is_array()) throw ParseError(ctx + ": expected an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<int>(i)] = as_number(j[i], ctx);
  }
  return v;
}

Mat3 as_mat3(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 3) {
    throw ParseError(ctx + ": expected 3 rows of 3 numbers");
  }
  Mat3 m;
  for (int r = 0; r < 3; ++r) m.row(r) = as_vec3(j[r], ctx).transpose();
  return m;
}

// Deterministic right-handed frame whose z axis is the given direction.
Mat3 frame_from_z(const Vec3& z_axis, const std::string& ctx) {
  const double n = z_axis.norm();
  if (!(n > 1e-12)) throw ParseError(ctx + ": z_axis must be nonzero");
  const Vec3 z = z_axis / n;
  Vec3 ref = std::abs(z.dot(Vec3::UnitX())) < 0.9 ? Vec3::UnitX()
                                                  : Vec3::UnitY();
  const Vec3 x = (ref - ref.dot(z) * z).normalized();
  const Vec3 y = z.cross(x);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return r;
}

RigidTransform as_transform(const json& j, const std::string& ctx) {
  Mat3 r = Mat3::Identity();
  Vec3 p = Vec3::Zero();
  if (j.contains("rotation")) r = as_mat3(j.at("rotation"), ctx + ".rotation");
  if (j.contains("translation_m")) {
    p = as_vec3(j.at("translation_m"), ctx + ".translation_m");
  }
  return RigidTransform(r, p);
}

}  // namespace

GripperModel load_gripper(const std::string& path) {
  const json j = load_json(path);
  const json& cups_j = require(j, "cups", path);
  if (!cups_j.is_array() || cups_j.empty()) {
    throw ParseError(path + ": 'cups' must be a non-empty array");
  }
  std::vector<SuctionCup> cups;
  for (std::size_t i = 0; i < cups_j.size(); ++i) {
    const std::string ctx = path + ": cups[" + std::to_string(i) + "]";
    const json& c = cups_j[i];
    SuctionCup cup;
    Vec3 pos = as_vec3(require(c, "position_m", ctx), ctx + ".position_m");
    Vec3 z = as_vec3(require(c, "z_axis", ctx), ctx + ".z_axis");
    cup.pose_in_tool = RigidTransform(frame_from_z(z, ctx), pos);
    cup.pad_radius = as_number(require(c, "pad_radius_m", ctx),
                               ctx + ".pad_radius_m");
    cup.suction_force = as_number(require(c, "suction_force_N", ctx),
                                  ctx + ".suction_force_N");
    cups.push_back(cup);
  }

  const double mu = as_number(require(j, "friction_mu", path),
                              path + ": friction_mu");
  const json& wj = require(j, "weights", path);
  StiffnessWeights w;
  w.normal = as_vec3(require(wj, "normal", path + ": weights"),
                     path + ": weights.normal");
  w.compressed = as_vec3(require(wj, "compressed", path + ": weights"),
                         path + ": weights.compressed");
  w.compression_threshold =
      as_number(require(wj, "fz_threshold_N", path + ": weights"),
                path + ": weights.fz_threshold_N");
  const std::string dir =
      require(wj, "threshold_direction", path + ": weights").get<std::string>();
  if (dir == "less-than") {
    w.threshold_direction = CompressionTest::LessThan;
  } else if (dir == "greater-than") {
    w.threshold_direction = CompressionTest::GreaterThan;
  } else {
    throw ParseError(path +
                     ": weights.threshold_direction must be 'less-than' or "
                     "'greater-than'");
  }
  try {
    return GripperModel(std::move(cups), mu, w);
  } catch (const Error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

ObjectModel load_object(const std::string& path) {
  const json j = load_json(path);
  const double mass = as_number(require(j, "mass_kg", path), path + ": mass_kg");
  Vec3 com = Vec3::Zero();
  if (j.contains("com_offset_m")) {
    com = as_vec3(j.at("com_offset_m"), path + ": com_offset_m");
  }
  try {
    if (j.contains("dims_m")) {
      return ObjectModel::box(mass, as_vec3(j.at("dims_m"), path + ": dims_m"),
                              com);
    }
    if (j.contains("inertia")) {
      return ObjectModel(mass, as_mat3(j.at("inertia"), path + ": inertia"),
                         com);
    }
  } catch (const Error& e) {
    throw ParseError(path + ": " + e.what());
  }
  throw ParseError(path + ": needs either 'dims_m' or 'inertia'");
}

KinematicChain load_chain(const std::string& path) {
  const json j = load_json(path);
  const json& joints_j = require(j, "joints", path);
  if (!joints_j.is_array() || joints_j.empty()) {
    throw ParseError(path + ": 'joints' must be a non-empty array");
  }
  KinematicChain chain;
  for (std::size_t i = 0; i < joints_j.size(); ++i) {
    const std::string ctx = path + ": joints[" + std::to_string(i) + "]";
    const json& c = joints_j[i];
    RevoluteJoint joint;
    joint.axis = as_vec3(require(c, "axis", ctx), ctx + ".axis");
    const double n = joint.axis.norm();
    if (!(n > 1e-12)) throw ParseError(ctx + ".axis must be nonzero");
    joint.axis /= n;
    if (c.contains("origin_m")) {
      joint.origin = as_vec3(c.at("origin_m"), ctx + ".origin_m");
    }
    if (c.contains("offset")) {
      joint.offset = as_transform(c.at("offset"), ctx + ".offset");
    }
    chain.joints.push_back(joint);
  }
  if (j.contains("tool_offset")) {
    chain.tool_offset = as_transform(j.at("tool_offset"), path + ": tool_offset");
  }
  chain.validate();
  return chain;
}

PathSpec load_path(const std::string& path) {
  const json j = load_json(path);
  const json& knots_j = require(j, "knots", path);
  if (!knots_j.is_array() || knots_j.size() < 2) {
    throw ParseError(path + ": 'knots' must list at least two rows");
  }
  const std::size_t dof = knots_j[0].size();
  Eigen::MatrixXd knots(knots_j.size(), dof);
  for (std::size_t r = 0; r < knots_j.size(); ++r) {
    Eigen::VectorXd row =
        as_vector(knots_j[r], path + ": knots[" + std::to_string(r) + "]");
    if (static_cast<std::size_t>(row.size()) != dof) {
      throw ParseError(path + ": knots rows have inconsistent sizes");
    }
    knots.row(static_cast<int>(r)) = row.transpose();
  }
  Eigen::VectorXd grid;
  if (j.contains("s_grid")) {
    grid = as_vector(j.at("s_grid"), path + ": s_grid");
    if (grid.size() != knots.rows()) {
      throw ParseError(path + ": s_grid length must match the knot count");
    }
  } else {
    grid = Eigen::VectorXd::LinSpaced(knots.rows(), 0.0, 1.0);
  }
  try {
    return PathSpec(std::move(grid), std::move(knots));
  } catch (const Error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

KinematicLimits load_limits(const std::string& path) {
  const json j = load_json(path);
  KinematicLimits lim;
  lim.vel_max = as_vector(require(j, "vel_max_rad_s", path),
                          path + ": vel_max_rad_s");
  lim.acc_max = as_vector(require(j, "acc_max_rad_s2", path),
                          path + ": acc_max_rad_s2");
  if (j.contains("jerk_max_rad_s3")) {
    lim.jerk_max = as_vector(j.at("jerk_max_rad_s3"),
                             path + ": jerk_max_rad_s3");
  }
  return lim;
}

Scenario load_scenario(const std::string& path) {
  const json j = load_json(path);
  const auto dir = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string& key) {
    const std::string rel = require(j, key, path).get<std::string>();
    std::filesystem::path p(rel);
    return (p.is_absolute() ? p : dir / p).string();
  };
  SolverOptions opt;
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    const std::string ctx = path + ": solver";
    if (s.contains("n_knots")) {
      opt.n_knots = static_cast<int>(as_number(s.at("n_knots"), ctx));
    }
    if (s.contains("epsilon")) opt.epsilon = as_number(s.at("epsilon"), ctx);
    if (s.contains("max_iters")) {
      opt.max_iters = static_cast<int>(as_number(s.at("max_iters"), ctx));
    }
    if (s.contains("trust_radius")) {
      opt.trust_radius = as_number(s.at("trust_radius"), ctx);
    }
    if (s.contains("grasp_enabled")) {
      opt.grasp_enabled = s.at("grasp_enabled").get<bool>();
    }
    if (s.contains("weight_adjustment_enabled")) {
      opt.weight_adjustment_enabled =
          s.at("weight_adjustment_enabled").get<bool>();
    }
  }
  if (opt.n_knots < 2) throw ParseError(path + ": solver.n_knots must be >= 2");
  return Scenario{.gripper = load_gripper(resolve("gripper")),
                  .object = load_object(resolve("object")),
                  .chain = load_chain(resolve("chain")),
                  .path = load_path(resolve("path")),
                  .limits = load_limits(resolve("limits")),
                  .solver = opt};
}

TotpProblem make_problem(Scenario sc) {
  TotpProblem p{.path = std::move(sc.path),
                .chain = std::move(sc.chain),
                .limits = std::move(sc.limits)};
  p.object = std::move(sc.object);
  p.gripper = std::move(sc.gripper);
  p.n_knots = sc.solver.n_knots;
  p.epsilon = sc.solver.epsilon;
  p.max_iters = sc.solver.max_iters;
  p.trust_radius = sc.solver.trust_radius;
  p.grasp_enabled = sc.solver.grasp_enabled;
  p.weight_adjustment_enabled = sc.solver.weight_adjustment_enabled;
  return p;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::vector<WrenchSample> load_dataset(const std::string& path,
                                       int expected_cups) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  int cups = 0;
  if (std::sscanf(line.c_str(), "cups,%d", &cups) != 1 || cups < 1) {
    throw ParseError(path + ": first row must be a 'cups,<count>' header");
  }
  if (expected_cups > 0 && cups != expected_cups) {
    throw ParseError(path + ": dataset has " + std::to_string(cups) +
                     " cups, gripper has " + std::to_string(expected_cups));
  }
  std::vector<WrenchSample> samples;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<double> vals;
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (...) {
        throw ParseError(path + ": row " + std::to_string(row) +
                         ": bad number '" + cell + "'");
      }
    }
    if (static_cast<int>(vals.size()) != 6 * (cups + 1)) {
      throw ParseError(path + ": row " + std::to_string(row) + " has " +
                       std::to_string(vals.size()) + " columns, expected " +
                       std::to_string(6 * (cups + 1)));
    }
    WrenchSample s;
    Vec6 tw;
    for (int i = 0; i < 6; ++i) tw[i] = vals[i];
    s.tool_wrench = Wrench(tw);
    for (int c = 0; c < cups; ++c) {
      Vec6 cw;
      for (int i = 0; i < 6; ++i) cw[i] = vals[6 * (c + 1) + i];
      s.cup_wrenches.emplace_back(cw);
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

void write_dataset(const std::string& path,
                   const std::vector<WrenchSample>& samples) {
  std::ofstream out(path);
  if (!out) throw Error(path + ": cannot open for writing");
  const int cups =
      samples.empty() ? 0 : static_cast<int>(samples[0].cup_wrenches.size());
  out << "cups," << cups << "\n";
  for (const auto& s : samples) {
    Vec6 tw = s.tool_wrench.vector();
    for (int i = 0; i < 6; ++i) out << (i ? "," : "") << format_number(tw[i]);
    for (const auto& cw : s.cup_wrenches) {
      Vec6 v = cw.vector();
      for (int i = 0; i < 6; ++i) out << "," << format_number(v[i]);
    }
    out << "\n";
  }
}

void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectoryRow>& rows, int dof) {
  std::ofstream out(path);
  if (!out) throw Error(path + ": cannot open for writing");
  out << "k,s,x,sdot,sddot,t";
  for (int j = 0; j < dof; ++j) out << ",q_" << j;
  for (int j = 0; j < dof; ++j) out << ",qd_" << j;
  for (int j = 0; j < dof; ++j) out << ",qdd_" << j;
  out << ",min_margin,active_row_label\n";
  for (const auto& r : rows) {
    out << r.k << "," << format_number(r.s) << "," << format_number(r.x) << ","
        << format_number(r.sdot) << "," << format_number(r.sddot) << ","
        << format_number(r.t);
    for (int j = 0; j < dof; ++j) out << "," << format_number(r.q[j]);
    for (int j = 0; j < dof; ++j) out << "," << format_number(r.qd[j]);
    for (int j = 0; j < dof; ++j) out << "," << format_number(r.qdd[j]);
    out << "," << format_number(r.min_margin) << "," << r.active_row_label
        << "\n";
  }
}

TrajectoryProfile read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::string header;
  if (!std::getline(in, header)) throw ParseError(path + ": empty file");
  std::stringstream hs(header);
  std::string col;
  int s_col = -1, x_col = -1, idx = 0;
  while (std::getline(hs, col, ',')) {
    if (col == "s") s_col = idx;
    if (col == "x") x_col = idx;
    ++idx;
  }
  if (s_col < 0 || x_col < 0) {
    throw ParseError(path + ": header must contain 's' and 'x' columns");
  }
  std::vector<double> s_vals, x_vals;
  std::string line;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<std::string> cells;
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) <= std::max(s_col, x_col)) {
      throw ParseError(path + ": row " + std::to_string(row) +
                       " has too few columns");
    }
    try {
      s_vals.push_back(std::stod(cells[s_col]));
      x_vals.push_back(std::stod(cells[x_col]));
    } catch (...) {
      throw ParseError(path + ": row " + std::to_string(row) +
                       ": bad number");
    }
  }
  if (s_vals.size() < 2) throw ParseError(path + ": needs at least two rows");
  TrajectoryProfile prof;
  prof.s = Eigen::Map<Eigen::VectorXd>(s_vals.data(),
                                       static_cast<int>(s_vals.size()));
  prof.x = Eigen::Map<Eigen::VectorXd>(x_vals.data(),
                                       static_cast<int>(x_vals.size()));
  return prof;
}

}  // namespace mgfc::io
