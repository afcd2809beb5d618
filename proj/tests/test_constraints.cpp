#include <doctest.h>

#include "helpers.hpp"

using namespace mgfc;
using testutil::arm3_chain;
using testutil::grid_gripper;
using testutil::testbed6;
using testutil::topdown_path;

namespace {

WeightMatrix normal_weights(const GripperModel& g) {
  return WeightMatrix::uniform(g.weights().normal, g.cup_count());
}

// Direct pipeline: Newton-Euler wrench -> distribute -> per-cup and total
// inequality evaluation, bypassing the stacked coefficient machinery.
Eigen::VectorXd direct_margins(const GripperModel& g, const DistributionMap& m,
                               const Vec6& tool_wrench) {
  auto suction = suction_loss_blocks(g);
  auto slip = slippage_block(g);
  Eigen::VectorXd cup_stack = m.cup_map * tool_wrench;
  Eigen::VectorXd out(suction.rhs.size() + 12);
  out.head(suction.rhs.size()) = suction.rows * cup_stack - suction.rhs;
  out.tail(12) = slip.rows * tool_wrench - slip.rhs;
  return out;
}

}  // namespace

TEST_CASE("distribution map") {
  SUBCASE("single cup map is the identity") {
    auto g = grid_gripper(1, 1, 0.1);
    auto map = distribution_map(g, normal_weights(g));
    CHECK((map.cup_map - Mat6::Identity()).cwiseAbs().maxCoeff() <= 1e-10);
  }

  SUBCASE("symmetric pair splits a pure force 50/50") {
    auto g = grid_gripper(2, 1, 0.2);
    auto map = distribution_map(g, normal_weights(g));
    Vec6 down = Vec6::Zero();
    down[5] = -100.0;
    Eigen::VectorXd cups = map.cup_map * down;
    CHECK(cups[5] == doctest::Approx(-50.0));
    CHECK(cups[11] == doctest::Approx(-50.0));
  }

  SUBCASE("matches solve_distribution and re-sums to the identity") {
    auto g = testbed6();
    auto map = distribution_map(g, normal_weights(g));
    auto mats = assemble_distribution_matrices(g);
    CHECK((mats.cup_to_tool * map.cup_map - Mat6::Identity())
              .cwiseAbs()
              .maxCoeff() <= 1e-9);
    std::mt19937_64 rng(73);
    for (int t = 0; t < 50; ++t) {
      Vec6 tool = testutil::random_wrench_vec(rng, 30.0, 300.0);
      auto ld = solve_distribution(Wrench(tool), g, normal_weights(g));
      Eigen::VectorXd cups = map.cup_map * tool;
      for (int i = 0; i < 6; ++i) {
        CHECK((cups.segment<6>(6 * i) - ld.per_cup_wrench[i].vector())
                  .cwiseAbs()
                  .maxCoeff() <= 1e-10);
      }
    }
  }
}

TEST_CASE("grasp constraint coefficients") {
  auto g = testbed6();
  auto chain = arm3_chain();
  auto path = topdown_path();
  auto map = distribution_map(g, normal_weights(g));

  SUBCASE("statics slice matches static holdability") {
    ObjectModel light = ObjectModel::box(5.0, Vec3(0.3, 0.3, 0.2),
                                         Vec3(0, 0, 0.1));
    auto form = parameterize_wrench(chain, path, light, 0.4);
    auto cs = grasp_constraint_coeffs(form, g, map);
    REQUIRE(cs.rows() == 5 * 6 + 12);
    CHECK(cs.evaluate(0.0, 0.0).maxCoeff() <= 0.0);

    // Heavier than the total suction capacity: statically infeasible.
    ObjectModel heavy = ObjectModel::box(100.0, Vec3(0.5, 0.5, 0.4),
                                         Vec3(0, 0, 0.2));
    auto heavy_form = parameterize_wrench(chain, path, heavy, 0.4);
    auto heavy_cs = grasp_constraint_coeffs(heavy_form, g, map);
    CHECK(heavy_cs.evaluate(0.0, 0.0).maxCoeff() > 0.0);
  }

  SUBCASE("random states match the direct pipeline") {
    ObjectModel obj = ObjectModel::box(9.0, Vec3(0.3, 0.3, 0.2),
                                       Vec3(0.02, 0.01, 0.12));
    std::mt19937_64 rng(79);
    std::uniform_real_distribution<double> us(0.0, 1.0);
    std::uniform_real_distribution<double> ud(-3.0, 3.0);
    for (int t = 0; t < 20; ++t) {
      const double s = us(rng);
      const double sdot = std::abs(ud(rng));
      const double sddot = ud(rng);
      auto form = parameterize_wrench(chain, path, obj, s);
      auto cs = grasp_constraint_coeffs(form, g, map);
      Eigen::VectorXd stacked = cs.evaluate(sdot * sdot, sddot);
      Vec6 wrench = form.evaluate(sdot * sdot, sddot);
      Eigen::VectorXd direct = direct_margins(g, map, wrench);
      CHECK((stacked - direct).cwiseAbs().maxCoeff() <= 1e-8);
      for (int r = 0; r < stacked.size(); ++r) {
        CHECK((stacked[r] > 0) == (direct[r] > 0));
      }
    }
  }

  SUBCASE("slippage constants ignore the weight matrix") {
    ObjectModel obj = ObjectModel::box(9.0, Vec3(0.3, 0.3, 0.2),
                                       Vec3(0, 0, 0.12));
    auto form = parameterize_wrench(chain, path, obj, 0.3);
    auto cs_normal = grasp_constraint_coeffs(form, g, map);
    // Mixed per-cup weights genuinely change the distribution. (A weight
    // matrix that is uniform across cups would not: on a planar gripper the
    // tangential and normal subproblems decouple and uniform scales cancel.)
    std::vector<bool> half_flagged = {true, true, true, false, false, false};
    auto other = distribution_map(
        g, WeightMatrix::from_flags(g.weights(), half_flagged));
    auto cs_other = grasp_constraint_coeffs(form, g, other);
    CHECK((cs_normal.zeta_const.tail(12) - cs_other.zeta_const.tail(12))
              .cwiseAbs()
              .maxCoeff() == 0.0);
    // Suction rows do depend on it.
    CHECK((cs_normal.zeta_const.head(30) - cs_other.zeta_const.head(30))
              .cwiseAbs()
              .maxCoeff() > 1e-6);
  }

  SUBCASE("row labels carry cup and row provenance") {
    ObjectModel obj = ObjectModel::box(2.0, Vec3(0.2, 0.2, 0.2), Vec3::Zero());
    auto form = parameterize_wrench(chain, path, obj, 0.1);
    auto cs = grasp_constraint_coeffs(form, g, map);
    CHECK(cs.labels[0].kind == RowLabel::Kind::SuctionLoss);
    CHECK(cs.labels[0].cup == 0);
    CHECK(cs.labels[7].cup == 1);
    CHECK(cs.labels[7].row == 2);
    CHECK(cs.labels[30].kind == RowLabel::Kind::Slippage);
    CHECK(cs.labels[30].row == 0);
    CHECK(cs.labels[0].to_string().find("suction-loss(cup 0") == 0);
  }
}

TEST_CASE("discretized rows substitute the difference quotient") {
  auto g = testbed6();
  auto map = distribution_map(g, normal_weights(g));
  ObjectModel obj = ObjectModel::box(7.0, Vec3(0.3, 0.3, 0.2), Vec3(0, 0, 0.1));
  auto form = parameterize_wrench(arm3_chain(), topdown_path(), obj, 0.5);
  auto cs = grasp_constraint_coeffs(form, g, map);

  SUBCASE("equal neighbors reduce to the zero-acceleration slice") {
    auto d = discretize_constraints(cs, 0.01);
    const double x = 3.7;
    Eigen::VectorXd lhs = d.coef_xk * x + d.coef_xk1 * x;
    Eigen::VectorXd expect = cs.zeta_dot * x;
    CHECK((lhs - expect).cwiseAbs().maxCoeff() <= 1e-10);
  }

  SUBCASE("zero-curvature rows ignore the grid spacing") {
    ConstraintSet flat = cs;
    flat.zeta_ddot.setZero();
    auto a = discretize_constraints(flat, 0.01);
    auto b = discretize_constraints(flat, 0.2);
    CHECK((a.coef_xk - b.coef_xk).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.coef_xk1 - b.coef_xk1).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("random substitution equivalence") {
    std::mt19937_64 rng(83);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    std::uniform_real_distribution<double> dd(0.002, 0.3);
    for (int t = 0; t < 20; ++t) {
      const double delta = dd(rng);
      const double xk = u(rng), xk1 = u(rng);
      auto d = discretize_constraints(cs, delta);
      Eigen::VectorXd disc =
          d.coef_xk * xk + d.coef_xk1 * xk1 - d.rhs;
      Eigen::VectorXd cont = cs.evaluate(xk, (xk1 - xk) / (2.0 * delta));
      CHECK((disc - cont).cwiseAbs().maxCoeff() <= 1e-12 *
                (1.0 + cont.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("nominal weight adjustment") {
  auto g = testbed6();
  auto chain = arm3_chain();
  auto path = testutil::sideways_path();
  const int n = 12;
  Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(n + 1, 0.0, 1.0);

  SUBCASE("zero nominal flags from the static wrench only") {
    ObjectModel obj = ObjectModel::box(20.0, Vec3(0.35, 0.35, 0.3),
                                       Vec3(0, 0, 0.15));
    std::vector<WrenchAffineForm> forms(n + 1);
    for (int k = 0; k <= n; ++k) {
      forms[k] = parameterize_wrench(chain, path, obj, grid[k]);
    }
    auto maps =
        nominal_weight_adjustment(forms, g, Eigen::VectorXd::Zero(n + 1), grid);
    REQUIRE(static_cast<int>(maps.size()) == n);
    auto normal_map = distribution_map(g, normal_weights(g));
    for (int k = 0; k < n; ++k) {
      auto ld = distribute_with_adjustment(Wrench(forms[k].b_const), g);
      const WeightMatrix expect =
          WeightMatrix::from_flags(g.weights(), ld.compressed_flags);
      CHECK(maps[k].weights_used == expect);
    }
  }

  SUBCASE("no threshold crossing returns the normal map everywhere") {
    ObjectModel obj = ObjectModel::box(1.0, Vec3(0.2, 0.2, 0.2),
                                       Vec3(0, 0, 0.1));
    std::vector<WrenchAffineForm> forms(n + 1);
    for (int k = 0; k <= n; ++k) {
      forms[k] = parameterize_wrench(chain, path, obj, grid[k]);
    }
    Eigen::VectorXd nominal = Eigen::VectorXd::Constant(n + 1, 0.2);
    auto maps = nominal_weight_adjustment(forms, g, nominal, grid);
    auto normal_map = distribution_map(g, normal_weights(g));
    for (const auto& m : maps) {
      CHECK(m.weights_used == normal_map.weights_used);
      CHECK((m.cup_map - normal_map.cup_map).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  SUBCASE("fast nominal on a pressing grasp flags interior knots") {
    // Top-down carry pressing into the cups under hard deceleration.
    auto press_path = topdown_path();
    ObjectModel obj = ObjectModel::box(26.0, Vec3(0.4, 0.4, 0.3),
                                       Vec3(0, 0, 0.15));
    std::vector<WrenchAffineForm> forms(n + 1);
    for (int k = 0; k <= n; ++k) {
      forms[k] = parameterize_wrench(chain, press_path, obj, grid[k]);
    }
    Eigen::VectorXd nominal(n + 1);
    for (int k = 0; k <= n; ++k) {
      nominal[k] = 40.0 * std::sin(M_PI * grid[k]);  // aggressive profile
    }
    auto maps = nominal_weight_adjustment(forms, g, nominal, grid);
    auto normal_map = distribution_map(g, normal_weights(g));
    bool any_flagged = false;
    for (int k = 0; k < n; ++k) {
      const double sddot =
          (nominal[k + 1] - nominal[k]) / (2.0 * (grid[k + 1] - grid[k]));
      auto ld = distribute_with_adjustment(
          Wrench(forms[k].evaluate(nominal[k], sddot)), g);
      int flagged = static_cast<int>(std::count(ld.compressed_flags.begin(),
                                                ld.compressed_flags.end(),
                                                true));
      any_flagged = any_flagged || flagged > 0;
      const WeightMatrix expect =
          WeightMatrix::from_flags(g.weights(), ld.compressed_flags);
      CHECK(maps[k].weights_used == expect);
      // A partially flagged knot genuinely changes the map; an all-flagged
      // one does not on a planar gripper (uniform weights cancel).
      if (flagged > 0 && flagged < g.cup_count()) {
        CHECK((maps[k].cup_map - normal_map.cup_map).cwiseAbs().maxCoeff() >
              1e-9);
      }
    }
    CHECK(any_flagged);
  }
}
