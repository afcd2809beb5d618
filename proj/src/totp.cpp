#include "mgfc/totp.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mgfc/lp.hpp"

namespace mgfc {

void KinematicLimits::validate(int dof) const {
  auto check = [&](const Eigen::VectorXd& v, const char* name) {
    if (v.size() == 0) return;
    if (v.size() != dof) {
      throw DimensionMismatch(std::string(name) + " has " +
                              std::to_string(v.size()) + " entries, expected " +
                              std::to_string(dof));
    }
    if (!(v.minCoeff() >= 0.0)) {
      throw Error(std::string(name) + " entries must be nonnegative");
    }
  };
  check(vel_max, "vel_max");
  check(acc_max, "acc_max");
  check(jerk_max, "jerk_max");
}

double LinearRow::evaluate(const Eigen::VectorXd& x) const {
  const int n = static_cast<int>(x.size());
  double v = 0.0;
  if (knot < n) v += c0 * x[knot];
  if (knot + 1 < n) v += c1 * x[knot + 1];
  if (knot + 2 < n) v += c2 * x[knot + 2];
  return v;
}

std::vector<LinearRow> first_order_rows(const PathSpec& path,
                                        const KinematicLimits& limits,
                                        int knot, double s) {
  std::vector<LinearRow> rows;
  if (!limits.has_velocity()) return rows;
  Eigen::VectorXd qp = path.first(s);
  for (int j = 0; j < qp.size(); ++j) {
    LinearRow r;
    r.knot = knot;
    r.c0 = qp[j] * qp[j];
    r.rhs = limits.vel_max[j] * limits.vel_max[j];
    r.label = {.kind = RowLabel::Kind::Velocity, .knot = knot, .joint = j};
    rows.push_back(r);
  }
  return rows;
}

std::vector<LinearRow> second_order_rows(const PathSpec& path,
                                         const KinematicLimits& limits,
                                         int knot, double s, double delta) {
  std::vector<LinearRow> rows;
  if (!limits.has_acceleration()) return rows;
  Eigen::VectorXd qp = path.first(s);
  Eigen::VectorXd qpp = path.second(s);
  for (int j = 0; j < qp.size(); ++j) {
    for (int sign : {+1, -1}) {
      LinearRow r;
      r.knot = knot;
      r.c0 = sign * (qpp[j] - qp[j] / (2.0 * delta));
      r.c1 = sign * qp[j] / (2.0 * delta);
      r.rhs = limits.acc_max[j];
      r.label = {.kind = RowLabel::Kind::Acceleration,
                 .knot = knot,
                 .joint = j,
                 .sign = sign};
      rows.push_back(r);
    }
  }
  return rows;
}

std::vector<LinearRow> third_order_rows(const PathSpec& path,
                                        const KinematicLimits& limits,
                                        int knot, const Eigen::VectorXd& grid,
                                        const Eigen::VectorXd& x_nominal) {
  std::vector<LinearRow> rows;
  if (!limits.has_jerk()) return rows;
  const int k = knot;
  if (k + 2 >= grid.size()) {
    throw Error("third_order_rows: knot needs two successors");
  }
  const double s = grid[k];
  const double dk = grid[k + 1] - grid[k];
  const double dk1 = grid[k + 2] - grid[k + 1];
  const double sq_k = std::sqrt(std::max(0.0, x_nominal[k]));
  const double sq_k1 = std::sqrt(std::max(0.0, x_nominal[k + 1]));
  const double gain = 2.0 * sq_k1 / (dk + dk1);  // d(sddot)/dt factor

  Eigen::VectorXd qp = path.first(s);
  Eigen::VectorXd qpp = path.second(s);
  Eigen::VectorXd qppp = path.third(s);
  for (int j = 0; j < qp.size(); ++j) {
    // jerk = q''' sdot^3 + 3 q'' sdot sddot + q' d(sddot)/dt, with the sqrt
    // factors frozen at the nominal so the row stays linear in x.
    const double a3 = qppp[j] * sq_k;
    const double a2 = 3.0 * qpp[j] * sq_k / (2.0 * dk);
    const double g0 = qp[j] * gain / (2.0 * dk);
    const double g2 = qp[j] * gain / (2.0 * dk1);
    for (int sign : {+1, -1}) {
      LinearRow r;
      r.knot = k;
      r.c0 = sign * (a3 - a2 + g0);
      r.c1 = sign * (a2 - g2 - g0);
      r.c2 = sign * g2;
      r.rhs = limits.jerk_max[j];
      r.label = {.kind = RowLabel::Kind::Jerk,
                 .knot = k,
                 .joint = j,
                 .sign = sign};
      rows.push_back(r);
    }
  }
  return rows;
}

namespace {

double floored_sqrt(const Eigen::VectorXd& x, int k, double x_floor) {
  const int n = static_cast<int>(x.size());
  const bool endpoint = k == 0 || k == n - 1;
  const double lo = endpoint ? 0.0 : x_floor;
  return std::sqrt(std::max(x[k], lo));
}

}  // namespace

Eigen::VectorXd linearized_cost(const Eigen::VectorXd& x_nominal,
                                const Eigen::VectorXd& grid, double x_floor) {
  const int n = static_cast<int>(x_nominal.size());
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  for (int k = 1; k + 1 < n; ++k) {
    const double sk = floored_sqrt(x_nominal, k, x_floor);
    const double skm = floored_sqrt(x_nominal, k - 1, x_floor);
    const double skp = floored_sqrt(x_nominal, k + 1, x_floor);
    const double dl = grid[k] - grid[k - 1];
    const double dr = grid[k + 1] - grid[k];
    c[k] = -dl / (2.0 * sk * (skm + sk) * (skm + sk)) -
           dr / (2.0 * sk * (sk + skp) * (sk + skp));
  }
  return c;
}

double path_time_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& grid) {
  double f = 0.0;
  for (int k = 0; k + 1 < x.size(); ++k) {
    const double den =
        std::sqrt(std::max(0.0, x[k])) + std::sqrt(std::max(0.0, x[k + 1]));
    const double d = grid[k + 1] - grid[k];
    f += den > 0.0 ? d / den : std::numeric_limits<double>::infinity();
  }
  return f;
}

Eigen::VectorXd timestamps_from_profile(const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& grid) {
  Eigen::VectorXd t(x.size());
  t[0] = 0.0;
  for (int k = 0; k + 1 < x.size(); ++k) {
    const double den =
        std::sqrt(std::max(0.0, x[k])) + std::sqrt(std::max(0.0, x[k + 1]));
    const double d = grid[k + 1] - grid[k];
    t[k + 1] =
        t[k] + (den > 0.0 ? 2.0 * d / den
                          : std::numeric_limits<double>::infinity());
  }
  return t;
}

namespace {

struct Workspace {
  Eigen::VectorXd grid;   // N+1
  Eigen::VectorXd delta;  // N
  Eigen::MatrixXd qp, qpp, qppp;
  std::vector<WrenchAffineForm> forms;  // per knot, grasp problems only

  bool grasp = false;
  GraspBlocks blocks;                    // valid when grasp
  Eigen::MatrixXd normal_cup_map;        // 6Nc x 6
  std::map<uint64_t, Eigen::MatrixXd> suction_map_cache;  // pattern -> 5Nc x 6
  std::vector<RowLabel> grasp_labels;    // labels for one knot's zeta rows
  const GripperModel* gripper = nullptr;
};

uint64_t flags_to_mask(const std::vector<bool>& flags) {
  uint64_t m = 0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i]) m |= (uint64_t{1} << i);
  }
  return m;
}

Workspace build_workspace(const TotpProblem& p) {
  if (p.n_knots < 2) throw Error("TotpProblem: n_knots must be >= 2");
  if (!(p.epsilon > 0.0)) throw Error("TotpProblem: epsilon must be > 0");
  if (!(p.trust_radius > 0.0)) {
    throw Error("TotpProblem: trust_radius must be > 0");
  }
  p.chain.validate();
  p.limits.validate(p.path.dof());
  if (p.chain.dof() != p.path.dof()) {
    throw DimensionMismatch("chain and path dof differ");
  }

  Workspace w;
  const int n = p.n_knots;
  w.grid = Eigen::VectorXd::LinSpaced(n + 1, 0.0, 1.0);
  w.delta = w.grid.tail(n) - w.grid.head(n);
  const int dof = p.path.dof();
  w.qp.resize(n + 1, dof);
  w.qpp.resize(n + 1, dof);
  w.qppp.resize(n + 1, dof);
  w.grasp = p.grasp_enabled;
  if (w.grasp) {
    if (!p.gripper || !p.object) {
      throw Error("grasp constraints need both a gripper and an object");
    }
    w.gripper = &*p.gripper;
    w.blocks = make_grasp_blocks(*p.gripper);
    w.normal_cup_map =
        w.blocks.mats.ring_to_cup *
        ring_force_operator(w.blocks.mats,
                            WeightMatrix::uniform(p.gripper->weights().normal,
                                                  p.gripper->cup_count()));
    w.forms.resize(n + 1);
    const int nc = p.gripper->cup_count();
    for (int i = 0; i < nc; ++i) {
      for (int r = 0; r < 5; ++r) {
        w.grasp_labels.push_back(
            {.kind = RowLabel::Kind::SuctionLoss, .cup = i, .row = r});
      }
    }
    for (int r = 0; r < 12; ++r) {
      w.grasp_labels.push_back({.kind = RowLabel::Kind::Slippage, .row = r});
    }
  }

  // Per-knot work is only heavy enough to parallelize when the grasp
  // wrench forms are being built.
  const ExecMode knot_mode =
      w.grasp ? p.mode : ExecMode::Serial;
  par::for_index(n + 1, knot_mode, [&](std::ptrdiff_t k) {
    const double s = w.grid[k];
    w.qp.row(k) = p.path.first(s).transpose();
    w.qpp.row(k) = p.path.second(s).transpose();
    w.qppp.row(k) = p.path.third(s).transpose();
    if (w.grasp) {
      w.forms[k] =
          parameterize_wrench(p.chain, p.path, *p.object, s, p.gravity);
    }
  });
  return w;
}

// Suction rows pre-multiplied by the distribution map for a flag pattern.
const Eigen::MatrixXd& suction_map_for(Workspace& w, uint64_t mask) {
  auto it = w.suction_map_cache.find(mask);
  if (it != w.suction_map_cache.end()) return it->second;
  const int nc = w.gripper->cup_count();
  std::vector<bool> flags(nc);
  for (int i = 0; i < nc; ++i) flags[i] = (mask >> i) & 1;
  Eigen::MatrixXd cup_map =
      w.blocks.mats.ring_to_cup *
      ring_force_operator(w.blocks.mats, WeightMatrix::from_flags(
                                             w.gripper->weights(), flags));
  return w.suction_map_cache
      .emplace(mask, w.blocks.suction.rows * cup_map)
      .first->second;
}

// Compressed-cup pattern at a knot given the nominal wrench there.
uint64_t pattern_at(const Workspace& w, const Vec6& wrench,
                    const StiffnessWeights& sw) {
  Eigen::VectorXd cups = w.normal_cup_map * wrench;
  uint64_t mask = 0;
  const int nc = static_cast<int>(cups.size()) / 6;
  for (int i = 0; i < nc; ++i) {
    if (sw.is_compressed(cups[6 * i + 5])) mask |= (uint64_t{1} << i);
  }
  return mask;
}

// Grasp rows for knot k (discretized over x_k, x_{k+1}) with the suction map
// chosen by the nominal-based pattern.
void append_grasp_rows(Workspace& w, const TotpProblem& p, int k,
                       uint64_t mask, std::vector<LinearRow>* rows) {
  const Eigen::MatrixXd& smap =
      p.weight_adjustment_enabled ? suction_map_for(w, mask)
                                  : suction_map_for(w, 0);
  const auto& form = w.forms[k];
  const int nc = w.gripper->cup_count();
  const int m = 5 * nc + 12;
  Eigen::VectorXd zdd(m), zd(m), zc(m);
  zdd.head(5 * nc) = smap * form.b_ddot;
  zd.head(5 * nc) = smap * form.b_dot;
  zc.head(5 * nc) = smap * form.b_const - w.blocks.suction.rhs;
  zdd.tail(12) = w.blocks.slippage.rows * form.b_ddot;
  zd.tail(12) = w.blocks.slippage.rows * form.b_dot;
  zc.tail(12) = w.blocks.slippage.rows * form.b_const - w.blocks.slippage.rhs;

  const bool last = k == p.n_knots;  // rest-state row at the final knot
  const double inv2d = last ? 0.0 : 1.0 / (2.0 * w.delta[k]);
  for (int r = 0; r < m; ++r) {
    LinearRow row;
    row.knot = k;
    row.c1 = zdd[r] * inv2d;
    row.c0 = zd[r] - row.c1;
    row.rhs = -zc[r];
    row.label = w.grasp_labels[r];
    row.label.knot = k;
    rows->push_back(row);
  }
}

Eigen::VectorXd velocity_upper_bounds(const TotpProblem& p,
                                      const Workspace& w) {
  const int n = p.n_knots;
  Eigen::VectorXd ub =
      Eigen::VectorXd::Constant(n + 1, std::numeric_limits<double>::infinity());
  if (!p.limits.has_velocity()) return ub;
  for (int k = 0; k <= n; ++k) {
    for (int j = 0; j < p.path.dof(); ++j) {
      const double qp2 = w.qp(k, j) * w.qp(k, j);
      if (qp2 > 1e-300) {
        ub[k] = std::min(
            ub[k], p.limits.vel_max[j] * p.limits.vel_max[j] / qp2);
      }
    }
  }
  return ub;
}

// Greedy forward/backward pass over the first/second-order limits only.
Eigen::VectorXd greedy_initial_profile(const TotpProblem& p,
                                       const Workspace& w) {
  const int n = p.n_knots;
  Eigen::VectorXd cap = velocity_upper_bounds(p, w);
  // A joint with q' ~ 0 but q'' != 0 still caps x_k through |q''| x <= a.
  if (p.limits.has_acceleration()) {
    for (int k = 0; k <= n; ++k) {
      for (int j = 0; j < p.path.dof(); ++j) {
        if (std::abs(w.qp(k, j)) < 1e-9 && std::abs(w.qpp(k, j)) > 1e-12) {
          cap[k] = std::min(cap[k], p.limits.acc_max[j] / std::abs(w.qpp(k, j)));
        }
      }
    }
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n + 1);
  const double huge = 1e9;
  for (int k = 0; k < n; ++k) {
    double hi = std::isfinite(cap[k + 1]) ? cap[k + 1] : huge;
    if (p.limits.has_acceleration()) {
      for (int j = 0; j < p.path.dof(); ++j) {
        const double qp = w.qp(k, j);
        if (std::abs(qp) < 1e-9) continue;
        const double a = p.limits.acc_max[j];
        const double base = w.qpp(k, j) * x[k];
        const double lo_end = 2.0 * w.delta[k] * (-a - base) / qp;
        const double hi_end = 2.0 * w.delta[k] * (a - base) / qp;
        hi = std::min(x[k] + std::max(lo_end, hi_end), hi);
      }
    }
    x[k + 1] = std::clamp(hi, 0.0, huge);
  }
  x[n] = 0.0;
  for (int k = n - 1; k >= 0; --k) {
    double hi = x[k];
    if (p.limits.has_acceleration()) {
      for (int j = 0; j < p.path.dof(); ++j) {
        const double a0 = w.qpp(k, j) - w.qp(k, j) / (2.0 * w.delta[k]);
        const double b0 = w.qp(k, j) / (2.0 * w.delta[k]);
        if (std::abs(a0) < 1e-12) continue;
        const double a = p.limits.acc_max[j];
        const double e0 = (-a - b0 * x[k + 1]) / a0;
        const double e1 = (a - b0 * x[k + 1]) / a0;
        hi = std::min(hi, std::max(e0, e1));
      }
    }
    x[k] = std::clamp(hi, 0.0, x[k]);
  }
  for (int k = 1; k < n; ++k) x[k] = std::max(x[k], p.x_floor);
  return x;
}

struct IterationRows {
  std::vector<LinearRow> rows;   // everything except pure velocity rows
  Eigen::VectorXd vel_ub;        // velocity rows folded into bounds
};

IterationRows assemble_rows(Workspace& w, const TotpProblem& p,
                            const Eigen::VectorXd& x_nominal,
                            bool include_final_rest_rows) {
  IterationRows out;
  out.vel_ub = velocity_upper_bounds(p, w);
  const int n = p.n_knots;

  std::vector<uint64_t> masks;
  if (w.grasp && p.weight_adjustment_enabled) {
    masks.resize(n + 1, 0);
    const StiffnessWeights& sw = w.gripper->weights();
    par::for_index(n + 1, p.mode, [&](std::ptrdiff_t k) {
      const double sddot =
          k < n ? (x_nominal[k + 1] - x_nominal[k]) / (2.0 * w.delta[k]) : 0.0;
      masks[k] = pattern_at(w, w.forms[k].evaluate(x_nominal[k], sddot), sw);
    });
    for (int k = 0; k <= n; ++k) suction_map_for(w, masks[k]);  // warm cache
  } else if (w.grasp) {
    masks.resize(n + 1, 0);
    suction_map_for(w, 0);
  }

  for (int k = 0; k < n; ++k) {
    auto acc = second_order_rows(p.path, p.limits, k, w.grid[k], w.delta[k]);
    out.rows.insert(out.rows.end(), acc.begin(), acc.end());
    if (p.limits.has_jerk() && k + 2 <= n) {
      auto jerk = third_order_rows(p.path, p.limits, k, w.grid, x_nominal);
      out.rows.insert(out.rows.end(), jerk.begin(), jerk.end());
    }
    if (w.grasp) append_grasp_rows(w, p, k, masks[k], &out.rows);
  }
  if (w.grasp && include_final_rest_rows) {
    append_grasp_rows(w, p, n, masks[n], &out.rows);
  }
  return out;
}

struct LpBuild {
  lp::LinearProgram prog;
  std::vector<int> row_origin;  // LP row -> index into IterationRows.rows
};

LpBuild build_lp(const TotpProblem& p, const IterationRows& ir,
                 const Eigen::VectorXd& x_nominal, const Eigen::VectorXd& cost,
                 double trust_scale, bool relax_lower) {
  const int n = p.n_knots;
  const int nv = n - 1;
  LpBuild b;
  b.prog = lp::LinearProgram::with_size(nv);
  for (int v = 0; v < nv; ++v) {
    const int k = v + 1;
    const double h =
        trust_scale *
        std::min(p.trust_radius, 0.5 * std::max(x_nominal[k], p.x_floor));
    b.prog.objective[v] = cost[k];
    b.prog.lower[v] = relax_lower ? 0.0 : std::max(0.0, x_nominal[k] - h);
    b.prog.upper[v] = std::min(ir.vel_ub[k], x_nominal[k] + h);
    if (b.prog.upper[v] < b.prog.lower[v]) {
      b.prog.lower[v] = std::max(0.0, std::min(b.prog.lower[v],
                                               b.prog.upper[v]));
    }
  }

  // Interval pruning: a row whose maximum over the bound box already
  // satisfies the inequality can never become active in this LP.
  std::vector<Eigen::VectorXd> kept;
  auto var_bounds = [&](int k, double* lo, double* hi) {
    if (k <= 0 || k >= n) {
      *lo = *hi = 0.0;
    } else {
      *lo = b.prog.lower[k - 1];
      *hi = b.prog.upper[k - 1];
    }
  };
  std::vector<int> origins;
  for (std::size_t i = 0; i < ir.rows.size(); ++i) {
    const LinearRow& r = ir.rows[i];
    double box_max = 0.0;
    bool has_var = false;
    const double cs[3] = {r.c0, r.c1, r.c2};
    for (int t = 0; t < 3; ++t) {
      const int k = r.knot + t;
      if (cs[t] == 0.0) continue;
      double lo, hi;
      var_bounds(k, &lo, &hi);
      if (k > 0 && k < n) has_var = true;
      box_max += cs[t] > 0 ? cs[t] * hi : cs[t] * lo;
    }
    if (!has_var) continue;  // constant rows are checked by the static gate
    if (box_max <= r.rhs - 1e-12) continue;
    Eigen::VectorXd dense = Eigen::VectorXd::Zero(nv);
    for (int t = 0; t < 3; ++t) {
      const int k = r.knot + t;
      if (k > 0 && k < n && cs[t] != 0.0) dense[k - 1] += cs[t];
    }
    kept.push_back(std::move(dense));
    origins.push_back(static_cast<int>(i));
  }
  b.prog.ineq_matrix.resize(static_cast<int>(kept.size()), nv);
  b.prog.ineq_rhs.resize(static_cast<int>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) {
    b.prog.ineq_matrix.row(static_cast<int>(i)) = kept[i].transpose();
    b.prog.ineq_rhs[static_cast<int>(i)] = ir.rows[origins[i]].rhs;
  }
  b.row_origin = std::move(origins);
  return b;
}

void check_static_feasibility(Workspace& w, const TotpProblem& p) {
  const int n = p.n_knots;
  const StiffnessWeights& sw = w.gripper->weights();
  for (int k = 0; k <= n; ++k) {
    const Vec6 rest = w.forms[k].b_const;
    const uint64_t mask =
        p.weight_adjustment_enabled ? pattern_at(w, rest, sw) : 0;
    const Eigen::MatrixXd& smap = suction_map_for(w, mask);
    const int nc = w.gripper->cup_count();
    Eigen::VectorXd zc(5 * nc + 12);
    zc.head(5 * nc) = smap * rest - w.blocks.suction.rhs;
    zc.tail(12) = w.blocks.slippage.rows * rest - w.blocks.slippage.rhs;
    int worst;
    if (zc.maxCoeff(&worst) > 1e-9) {
      RowLabel label = w.grasp_labels[worst];
      label.knot = k;
      throw StaticallyInfeasible(
          "grasp cannot hold the object at rest at knot " + std::to_string(k) +
              " (" + label.to_string() + ", violation " +
              std::to_string(zc[worst]) + ")",
          k, label.to_string());
    }
  }
}

}  // namespace

std::vector<LinearRow> stacked_rows(const TotpProblem& p,
                                    const Eigen::VectorXd& x_nominal) {
  Workspace w = build_workspace(p);
  IterationRows ir = assemble_rows(w, p, x_nominal, true);
  std::vector<LinearRow> rows = std::move(ir.rows);
  for (int k = 0; k <= p.n_knots; ++k) {
    auto vel = first_order_rows(p.path, p.limits, k, w.grid[k]);
    rows.insert(rows.end(), vel.begin(), vel.end());
  }
  return rows;
}

TotpSolution solve_totp(const TotpProblem& p) {
  Workspace w = build_workspace(p);
  if (w.grasp) check_static_feasibility(w, p);

  const int n = p.n_knots;
  Eigen::VectorXd nominal = greedy_initial_profile(p, w);
  double prev_cost = std::numeric_limits<double>::infinity();
  bool prev_feasible = false;
  double trust_scale = 1.0;
  Eigen::VectorXd best_x;
  double best_cost = std::numeric_limits<double>::infinity();
  int self_infeasible_streak = 0;

  TotpSolution sol;
  sol.x = nominal;

  lp::SimplexOptions lp_opt;
  lp_opt.mode = p.mode;

  for (int it = 1; it <= p.max_iters; ++it) {
    IterationRows ir = assemble_rows(w, p, nominal, false);
    Eigen::VectorXd cost = linearized_cost(nominal, w.grid, p.x_floor);

    LpBuild b = build_lp(p, ir, nominal, cost, trust_scale, false);
    lp::LpSolution lps = lp::solve_lp(b.prog, lp_opt);
    if (lps.status == lp::Status::Infeasible) {
      // The trust box around an infeasible nominal can exclude the feasible
      // set; retry allowing the profile to drop toward rest.
      b = build_lp(p, ir, nominal, cost, trust_scale, true);
      lps = lp::solve_lp(b.prog, lp_opt);
    }
    // The nominal-based rows themselves (weight-adjustment patterns, jerk
    // linearization) can be inconsistent at an over-fast nominal even though
    // the problem is statically feasible. Back the nominal off toward rest,
    // where the rows approach the statically checked set.
    for (int backoff = 0;
         lps.status == lp::Status::Infeasible && backoff < 60; ++backoff) {
      nominal *= 0.5;
      if (nominal.cwiseAbs().maxCoeff() < p.x_floor) nominal.setZero();
      ir = assemble_rows(w, p, nominal, false);
      cost = linearized_cost(nominal, w.grid, p.x_floor);
      b = build_lp(p, ir, nominal, cost, trust_scale, true);
      lps = lp::solve_lp(b.prog, lp_opt);
      if (nominal.isZero(0.0)) break;
    }
    if (lps.status != lp::Status::Optimal) {
      int worst = -1;
      double worst_v = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < ir.rows.size(); ++i) {
        const double v = ir.rows[i].evaluate(nominal) - ir.rows[i].rhs;
        if (v > worst_v) {
          worst_v = v;
          worst = static_cast<int>(i);
        }
      }
      throw LpInfeasible(
          "SLP subproblem " + std::string(lps.status == lp::Status::Unbounded
                                              ? "unbounded"
                                              : "infeasible"),
          worst >= 0 ? ir.rows[worst].label.to_string() : "unknown");
    }

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n + 1);
    x.segment(1, n - 1) = lps.x;
    sol.iterations = it;

    // Rows are nominal-dependent (compression patterns, jerk linearization).
    // A proposal that is feasible for the nominal's rows can violate its own
    // recomputed rows when a pattern flips; accepting those steps produces a
    // limit cycle. Once the nominal itself is self-consistent, reject such
    // proposals and shrink the trust box instead.
    double self_viol_nominal = 0.0;
    for (const auto& r : ir.rows) {
      self_viol_nominal =
          std::max(self_viol_nominal, r.evaluate(nominal) - r.rhs);
    }
    IterationRows at_x = assemble_rows(w, p, x, false);
    double self_viol_x = 0.0;
    for (const auto& r : at_x.rows) {
      self_viol_x = std::max(self_viol_x, r.evaluate(x) - r.rhs);
    }
    if (p.record_iterates) {
      sol.iterates.push_back(x);
      sol.iterate_nominals.push_back(nominal);
    }
    if (self_viol_nominal <= 1e-8 && self_viol_x > 1e-8) {
      trust_scale = std::max(1e-12, 0.25 * trust_scale);
      continue;  // keep the current nominal
    }
    const double cost_now = path_time_cost(x, w.grid);
    // Shrink whenever a feasible nominal failed to make real progress; this
    // covers both true cost increases and vertex alternation at flat cost.
    if (prev_feasible &&
        cost_now > prev_cost - 1e-10 * (1.0 + std::abs(prev_cost))) {
      trust_scale = std::max(1e-12, 0.5 * trust_scale);
    }
    prev_feasible = self_viol_x <= 1e-8;
    prev_cost = cost_now;
    if (prev_feasible && cost_now < best_cost) {
      best_cost = cost_now;
      best_x = x;
    }

    const double step = (x - nominal).cwiseAbs().maxCoeff();
    nominal = x;
    if (prev_feasible && step < p.epsilon) {
      sol.converged = true;
      break;
    }

    // Two pattern states can alternate while both stay infeasible under
    // their own rows; the static check guarantees the slow region is
    // self-consistent, so back off toward it when restoration stalls.
    self_infeasible_streak = prev_feasible ? 0 : self_infeasible_streak + 1;
    if (self_infeasible_streak >= 3) {
      nominal *= 0.5;
      trust_scale = std::max(1e-12, 0.5 * trust_scale);
      self_infeasible_streak = 0;
      prev_feasible = false;
      prev_cost = std::numeric_limits<double>::infinity();
    }
  }
  if (!sol.converged && best_x.size() > 0) nominal = best_x;

  sol.x = nominal;
  sol.timestamps = timestamps_from_profile(nominal, w.grid);
  sol.total_time = sol.timestamps[n];
  if (!std::isfinite(sol.total_time)) sol.converged = false;

  // Margins over the full stacked system (velocity rows included) at the
  // final profile, grouped per knot.
  IterationRows final_rows = assemble_rows(w, p, nominal, true);
  std::vector<LinearRow> all = std::move(final_rows.rows);
  for (int k = 0; k <= n; ++k) {
    auto vel = first_order_rows(p.path, p.limits, k, w.grid[k]);
    all.insert(all.end(), vel.begin(), vel.end());
  }
  sol.knot_margins.assign(n + 1, KnotMargin{
                                     std::numeric_limits<double>::infinity(),
                                     RowLabel{}});
  sol.min_margin = std::numeric_limits<double>::infinity();
  for (const auto& r : all) {
    const double m = r.margin(nominal);
    if (m < sol.knot_margins[r.knot].margin) {
      sol.knot_margins[r.knot] = {m, r.label};
    }
    if (m < sol.min_margin) {
      sol.min_margin = m;
      sol.min_margin_row = r.label;
    }
  }
  return sol;
}

MaxLoadResult max_load_search(const TotpProblem& p,
                              const Eigen::VectorXd& fixed_x) {
  if (!p.gripper || !p.object) {
    throw Error("max_load_search needs a gripper and an object");
  }
  if (fixed_x.size() != p.n_knots + 1) {
    throw DimensionMismatch("fixed_x must have n_knots + 1 entries");
  }

  TotpProblem unit = p;
  unit.object = p.object->with_mass(1.0);
  unit.grasp_enabled = true;
  Workspace w = build_workspace(unit);
  const int n = p.n_knots;
  const StiffnessWeights& sw = w.gripper->weights();

  struct Eval {
    double worst;
    RowLabel label;
  };
  auto evaluate = [&](double mass) -> Eval {
    Eval e{-std::numeric_limits<double>::infinity(), RowLabel{}};
    for (int k = 0; k <= n; ++k) {
      const double sddot =
          k < n ? (fixed_x[k + 1] - fixed_x[k]) / (2.0 * w.delta[k]) : 0.0;
      const Vec6 wrench = mass * w.forms[k].evaluate(fixed_x[k], sddot);
      const uint64_t mask =
          p.weight_adjustment_enabled ? pattern_at(w, wrench, sw) : 0;
      const Eigen::MatrixXd& smap = suction_map_for(w, mask);
      const int nc = w.gripper->cup_count();
      Eigen::VectorXd z(5 * nc + 12);
      z.head(5 * nc) = smap * wrench - w.blocks.suction.rhs;
      z.tail(12) = w.blocks.slippage.rows * wrench - w.blocks.slippage.rhs;
      int worst;
      const double v = z.maxCoeff(&worst);
      if (v > e.worst) {
        e.worst = v;
        e.label = w.grasp_labels[worst];
        e.label.knot = k;
      }
    }
    return e;
  };
  auto feasible = [&](double mass) { return evaluate(mass).worst <= 1e-9; };

  double lo = 0.0;
  double hi = 1.0;
  constexpr double kMassCap = 1e6;
  while (hi < kMassCap && feasible(hi)) {
    lo = hi;
    hi *= 2.0;
  }
  if (hi >= kMassCap) {
    return {kMassCap, evaluate(kMassCap).label};
  }
  while (hi - lo > 1e-3) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  MaxLoadResult res;
  res.max_load_kg = lo < 1e-3 ? 0.0 : lo;
  res.binding_row = evaluate(std::max(lo, 1e-6)).label;
  return res;
}

}  // namespace mgfc
