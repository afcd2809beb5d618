#include "mgfc/lp.hpp"

#include <cmath>
#include <vector>

namespace mgfc::lp {
namespace {

constexpr int kNonBasicLower = -1;
constexpr int kNonBasicUpper = -2;

// Maps an original variable to its internal shifted/negated column(s).
struct VarMap {
  int column = -1;       // primary internal column
  int neg_column = -1;   // second column for free variables (x = z+ - z-)
  double shift = 0.0;    // x = sign * z + shift
  double sign = 1.0;
};

struct Tableau {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;  // row-major rows x cols

  double* row(int i) { return a.data() + static_cast<std::ptrdiff_t>(i) * cols; }
  const double* row(int i) const {
    return a.data() + static_cast<std::ptrdiff_t>(i) * cols;
  }
};

// Row-elimination kernel: rows[i] -= rows[i][col] * pivot_row for all i except
// the pivot row, plus the two cost rows. This is the simplex hot loop; the
// parallel path must stay bitwise identical to the serial one (independent
// row updates, no reductions).
void eliminate_column(Tableau& t, std::vector<double>& cost1,
                      std::vector<double>& cost2, int pivot_row, int col,
                      ExecMode mode, long long parallel_threshold) {
  const double* pr = t.row(pivot_row);
  const int cols = t.cols;
  auto update_row = [&](double* r) {
    const double f = r[col];
    if (f == 0.0) return;
    for (int j = 0; j < cols; ++j) r[j] -= f * pr[j];
    r[col] = 0.0;
  };
  const bool big =
      static_cast<long long>(t.rows) * cols > parallel_threshold;
  par::for_index(
      t.rows, big ? mode : ExecMode::Serial,
      [&](std::ptrdiff_t i) {
        if (static_cast<int>(i) == pivot_row) return;
        update_row(t.row(static_cast<int>(i)));
      });
  update_row(cost1.data());
  update_row(cost2.data());
}

struct Internal {
  Tableau t;
  std::vector<double> ub;       // per internal variable (lb is always 0)
  std::vector<double> value;    // current value per internal variable
  std::vector<int> state;      // kNonBasicLower/kNonBasicUpper or basic row
  std::vector<int> basis;      // row -> variable
  std::vector<bool> eligible;  // artificials become ineligible
  std::vector<double> rhs_sign;  // +-1 per row vs. the user's row orientation
  int n_struct = 0;
  int first_slack = 0;
  int first_art = 0;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opt) {
  const int n = lp.num_vars();
  const int m_ineq = static_cast<int>(lp.ineq_rhs.size());
  const int m_eq = static_cast<int>(lp.eq_rhs.size());
  const int m = m_ineq + m_eq;
  if (lp.ineq_matrix.rows() != m_ineq || lp.ineq_matrix.cols() != n ||
      lp.eq_matrix.rows() != m_eq || lp.eq_matrix.cols() != n ||
      lp.lower.size() != n || lp.upper.size() != n) {
    throw DimensionMismatch("solve_lp: inconsistent LP dimensions");
  }

  LpSolution sol;
  for (int j = 0; j < n; ++j) {
    if (lp.lower[j] > lp.upper[j]) {
      sol.status = Status::Infeasible;
      return sol;
    }
  }

  // Internal variables: shift finite lower bounds to zero, negate
  // upper-bounded-only variables, split free variables.
  std::vector<VarMap> vmap(n);
  int nz = 0;
  for (int j = 0; j < n; ++j) {
    const double lo = lp.lower[j];
    const double hi = lp.upper[j];
    if (std::isfinite(lo)) {
      vmap[j] = {nz++, -1, lo, 1.0};
    } else if (std::isfinite(hi)) {
      vmap[j] = {nz++, -1, hi, -1.0};
    } else {
      vmap[j] = {nz, nz + 1, 0.0, 1.0};
      nz += 2;
    }
  }

  Internal s;
  s.n_struct = nz;
  s.first_slack = nz;
  const int n_slack = m_ineq;

  // Assemble internal rows (equalities first), tracking rhs after shifts.
  Eigen::MatrixXd rows_int = Eigen::MatrixXd::Zero(m, nz);
  Eigen::VectorXd rhs_int(m);
  auto emit_row = [&](int r, const Eigen::VectorXd& coeff, double rhs) {
    double b = rhs;
    for (int j = 0; j < n; ++j) {
      const double c = coeff[j];
      if (c == 0.0) continue;
      b -= c * vmap[j].shift;
      rows_int(r, vmap[j].column) += c * vmap[j].sign;
      if (vmap[j].neg_column >= 0) rows_int(r, vmap[j].neg_column) -= c;
    }
    rhs_int[r] = b;
  };
  for (int i = 0; i < m_eq; ++i) emit_row(i, lp.eq_matrix.row(i), lp.eq_rhs[i]);
  for (int i = 0; i < m_ineq; ++i) {
    emit_row(m_eq + i, lp.ineq_matrix.row(i), lp.ineq_rhs[i]);
  }

  // Decide slack/artificial setup per row. With all structural variables at
  // zero, a row with nonnegative rhs and a slack starts feasible; otherwise
  // the row is negated and gets a basic artificial.
  s.rhs_sign.assign(m, 1.0);
  std::vector<int> art_of_row(m, -1);
  std::vector<int> slack_of_row(m, -1);
  int n_art = 0;
  for (int i = 0; i < m; ++i) {
    const bool has_slack = i >= m_eq;
    if (has_slack) slack_of_row[i] = s.first_slack + (i - m_eq);
    const bool need_art = !has_slack || rhs_int[i] < 0.0;
    if (rhs_int[i] < 0.0) s.rhs_sign[i] = -1.0;
    if (need_art) art_of_row[i] = n_art++;
  }
  s.first_art = nz + n_slack;
  const int nv = nz + n_slack + n_art;

  s.t.rows = m;
  s.t.cols = nv;
  s.t.a.assign(static_cast<std::size_t>(m) * nv, 0.0);
  s.ub.assign(nv, kInf);
  s.value.assign(nv, 0.0);
  s.state.assign(nv, kNonBasicLower);
  s.basis.assign(m, -1);
  s.eligible.assign(nv, true);

  for (int j = 0; j < n; ++j) {
    const double lo = lp.lower[j];
    const double hi = lp.upper[j];
    if (std::isfinite(lo)) {
      s.ub[vmap[j].column] = std::isfinite(hi) ? hi - lo : kInf;
    }
  }

  int next_art = s.first_art;
  for (int i = 0; i < m; ++i) {
    const double sign = s.rhs_sign[i];
    double* row = s.t.row(i);
    for (int j = 0; j < nz; ++j) row[j] = sign * rows_int(i, j);
    if (slack_of_row[i] >= 0) row[slack_of_row[i]] = sign;  // slack coef
    double b = sign * rhs_int[i];
    if (art_of_row[i] >= 0) {
      const int col = next_art++;
      art_of_row[i] = col;
      row[col] = 1.0;
      s.basis[i] = col;
      s.state[col] = i;
      s.value[col] = b;
    } else {
      const int col = slack_of_row[i];
      s.basis[i] = col;
      s.state[col] = i;
      s.value[col] = b;
    }
  }

  // Cost rows as reduced-cost vectors. Phase 1 minimizes the sum of the
  // artificials (all basic initially, so reduced costs are column sums over
  // artificial rows, negated). Phase 2 carries the user objective.
  std::vector<double> cost1(nv, 0.0), cost2(nv, 0.0);
  for (int i = 0; i < m; ++i) {
    if (art_of_row[i] < 0) continue;
    const double* row = s.t.row(i);
    for (int j = 0; j < nv; ++j) cost1[j] -= row[j];
    cost1[art_of_row[i]] = 0.0;
  }
  for (int j = 0; j < n; ++j) {
    const double c = lp.objective[j];
    if (c == 0.0) continue;
    cost2[vmap[j].column] += c * vmap[j].sign;
    if (vmap[j].neg_column >= 0) cost2[vmap[j].neg_column] -= c;
  }

  const long long bland_after = 10LL * (m + n);
  const long long iter_cap = 50LL * (m + n) + 20;
  long long iters = 0;

  auto phase1_objective = [&]() {
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
      if (s.basis[i] >= s.first_art) sum += s.value[s.basis[i]];
    }
    return sum;
  };

  // One bounded-variable simplex phase over the given cost row.
  // Returns true on optimality, false on unboundedness.
  auto run_phase = [&](std::vector<double>& cost, bool phase1) -> bool {
    for (;;) {
      if (phase1 && phase1_objective() <= opt.feas_tol) return true;
      if (++iters > iter_cap) {
        throw LpNumericalFailure("simplex exceeded iteration cap");
      }
      const bool bland = iters > bland_after;

      int enter = -1;
      double best = opt.cost_tol;
      for (int j = 0; j < nv; ++j) {
        if (!s.eligible[j]) continue;
        const int st = s.state[j];
        double score = 0.0;
        if (st == kNonBasicLower) {
          score = -cost[j];
        } else if (st == kNonBasicUpper) {
          score = cost[j];
        } else {
          continue;
        }
        if (score > best) {
          enter = j;
          best = score;
          if (bland) break;
        }
      }
      if (enter < 0) return true;  // optimal for this phase

      const double dir = s.state[enter] == kNonBasicLower ? 1.0 : -1.0;
      // Ratio test: bound flip of the entering variable vs. first basic
      // variable to hit one of its bounds.
      double t_max = s.ub[enter];  // lb is 0 for every internal variable
      int leave_row = -1;
      bool leave_at_upper = false;
      constexpr double kTie = 1e-12;
      for (int i = 0; i < m; ++i) {
        const double coef = dir * s.t.row(i)[enter];
        const int bi = s.basis[i];
        double limit;
        bool at_upper;
        if (coef > opt.pivot_tol) {
          limit = std::max(0.0, s.value[bi]) / coef;
          at_upper = false;
        } else if (coef < -opt.pivot_tol && std::isfinite(s.ub[bi])) {
          limit = std::max(0.0, s.ub[bi] - s.value[bi]) / (-coef);
          at_upper = true;
        } else {
          continue;
        }
        bool take = false;
        if (limit < t_max - kTie) {
          take = true;
        } else if (limit <= t_max + kTie && leave_row >= 0) {
          const int cur = s.basis[leave_row];
          const bool bi_art = bi >= s.first_art;
          const bool cur_art = cur >= s.first_art;
          if (bland) {
            take = bi < cur;  // lowest-index anti-cycling rule
          } else if (bi_art != cur_art) {
            take = bi_art;  // drive artificials out first
          } else {
            take = bi < cur;
          }
        }
        if (take) {
          t_max = std::min(t_max, limit);
          leave_row = i;
          leave_at_upper = at_upper;
        }
      }

      if (!std::isfinite(t_max)) return false;  // unbounded direction

      if (leave_row < 0) {
        // Bound flip: entering variable moves across its range.
        const double t = t_max;
        for (int i = 0; i < m; ++i) {
          s.value[s.basis[i]] -= dir * s.t.row(i)[enter] * t;
        }
        s.value[enter] = s.state[enter] == kNonBasicLower ? s.ub[enter] : 0.0;
        s.state[enter] =
            s.state[enter] == kNonBasicLower ? kNonBasicUpper : kNonBasicLower;
        continue;
      }

      // Move by t, then pivot enter into the basis at leave_row.
      const double t = t_max;
      for (int i = 0; i < m; ++i) {
        s.value[s.basis[i]] -= dir * s.t.row(i)[enter] * t;
      }
      const int leave_var = s.basis[leave_row];
      s.value[leave_var] = leave_at_upper ? s.ub[leave_var] : 0.0;
      s.state[leave_var] = leave_at_upper ? kNonBasicUpper : kNonBasicLower;
      if (leave_var >= s.first_art) s.eligible[leave_var] = false;

      const double enter_value =
          (dir > 0 ? 0.0 : s.ub[enter]) + dir * t;  // from its old bound
      double* pr = s.t.row(leave_row);
      const double pivot = pr[enter];
      for (int j = 0; j < nv; ++j) pr[j] /= pivot;
      pr[enter] = 1.0;
      eliminate_column(s.t, cost1, cost2, leave_row, enter, opt.mode,
                       opt.parallel_threshold);
      s.basis[leave_row] = enter;
      s.state[enter] = leave_row;
      s.value[enter] = enter_value;
    }
  };

  if (n_art > 0) {
    if (!run_phase(cost1, true)) {
      throw LpNumericalFailure("phase 1 reported an unbounded direction");
    }
    if (phase1_objective() > opt.feas_tol * (1.0 + rhs_int.cwiseAbs().sum())) {
      sol.status = Status::Infeasible;
      sol.iterations = static_cast<int>(iters);
      return sol;
    }
    // Pin remaining artificials (basic at ~0 in redundant rows) to zero and
    // bar every artificial from re-entering.
    for (int j = s.first_art; j < nv; ++j) {
      s.eligible[j] = false;
      s.ub[j] = 0.0;
      if (s.state[j] < 0) s.value[j] = 0.0;
    }
    for (int i = 0; i < m; ++i) {
      if (s.basis[i] >= s.first_art) s.value[s.basis[i]] = 0.0;
    }
  }

  if (!run_phase(cost2, false)) {
    sol.status = Status::Unbounded;
    sol.iterations = static_cast<int>(iters);
    return sol;
  }

  // Recover the original variables.
  sol.x = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    double z = s.value[vmap[j].column];
    if (vmap[j].neg_column >= 0) z -= s.value[vmap[j].neg_column];
    sol.x[j] = vmap[j].sign * z + vmap[j].shift;
  }
  sol.objective_value = lp.objective.dot(sol.x);

  // Duals from the final reduced costs of slack (inequality rows) and
  // artificial (equality rows) columns, undoing row negation.
  sol.ineq_duals = Eigen::VectorXd::Zero(m_ineq);
  sol.eq_duals = Eigen::VectorXd::Zero(m_eq);
  for (int i = 0; i < m; ++i) {
    if (i < m_eq) {
      sol.eq_duals[i] = s.rhs_sign[i] * cost2[art_of_row[i]];
    } else {
      sol.ineq_duals[i - m_eq] = cost2[slack_of_row[i]];
    }
  }
  sol.status = Status::Optimal;
  sol.iterations = static_cast<int>(iters);
  return sol;
}

}  // namespace mgfc::lp
