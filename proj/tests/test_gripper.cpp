#include <doctest.h>

#include "helpers.hpp"

using namespace mgfc;
using testutil::grid_gripper;
using testutil::testbed6;

TEST_CASE("ring force map") {
  SuctionCup cup;
  cup.pad_radius = 0.03;
  cup.suction_force = 118.6;
  auto map = ring_force_map(cup);

  SUBCASE("pad geometry: four rim points at axis-aligned angles") {
    auto pts = cup.ring_points();
    CHECK((pts[0] - Vec3(0.03, 0, 0)).norm() == 0.0);
    CHECK((pts[1] - Vec3(0, 0.03, 0)).norm() == 0.0);
    CHECK((pts[2] - Vec3(-0.03, 0, 0)).norm() == 0.0);
    CHECK((pts[3] - Vec3(0, -0.03, 0)).norm() == 0.0);
  }

  SUBCASE("equal ring forces cancel moments") {
    Eigen::VectorXd f(12);
    for (int j = 0; j < 4; ++j) f.segment<3>(3 * j) = Vec3(1.0, -2.0, 3.0);
    Vec6 wrench = map * f;
    CHECK(wrench.head<3>().norm() <= 1e-15);
    CHECK((wrench.tail<3>() - Vec3(4.0, -8.0, 12.0)).norm() <= 1e-14);
  }

  SUBCASE("single rim force reproduces the cross product") {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(12);
    f.segment<3>(0) = Vec3(0, 0, -7.0);  // at rim point (r, 0, 0)
    Vec6 wrench = map * f;
    CHECK((wrench.head<3>() - Vec3(0.03, 0, 0).cross(Vec3(0, 0, -7.0))).norm() <=
          1e-15);
    CHECK((wrench.head<3>() - Vec3(0, 0.21, 0)).norm() <= 1e-15);
  }
}

TEST_CASE("distribution matrix assembly") {
  SUBCASE("single cup at the tool origin") {
    auto g = grid_gripper(1, 1, 0.1);
    auto mats = assemble_distribution_matrices(g);
    CHECK((mats.cup_to_tool - Mat6::Identity()).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((mats.ring_to_tool - mats.ring_to_cup).cwiseAbs().maxCoeff() <=
          1e-15);
  }

  SUBCASE("symmetric pair cancels x/y moments for equal ring forces") {
    auto g = grid_gripper(2, 1, 0.2);
    auto mats = assemble_distribution_matrices(g);
    Eigen::VectorXd f(24);
    for (int j = 0; j < 8; ++j) f.segment<3>(3 * j) = Vec3(0, 0, -5.0);
    Vec6 tool = mats.ring_to_tool * f;
    CHECK(std::abs(tool[0]) <= 1e-12);
    CHECK(std::abs(tool[1]) <= 1e-12);
  }

  SUBCASE("six-cup grid against per-force adjoint transport") {
    auto g = testbed6();
    auto mats = assemble_distribution_matrices(g);
    double worst = 0.0;
    for (int i = 0; i < g.cup_count(); ++i) {
      const auto& cup = g.cups()[i];
      Mat6 wrench_to_tool =
          adjoint(cup.pose_in_tool.inverse()).transpose();
      auto pts = cup.ring_points();
      for (int j = 0; j < 4; ++j) {
        for (int axis = 0; axis < 3; ++axis) {
          Vec3 f = Vec3::Unit(axis);
          Vec6 cup_wrench;
          cup_wrench << pts[j].cross(f), f;
          Vec6 expect = wrench_to_tool * cup_wrench;
          Vec6 got = mats.ring_to_tool.col(12 * i + 3 * j + axis);
          worst = std::max(worst, (expect - got).cwiseAbs().maxCoeff());
        }
      }
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("suction loss blocks") {
  auto g = testbed6();  // psi = 118.6, r_pad = 0.03
  auto blocks = suction_loss_blocks(g);
  REQUIRE(blocks.rows.rows() == 30);
  REQUIRE(blocks.rhs.size() == 30);

  SUBCASE("margins of the unloaded gripper") {
    Eigen::VectorXd margins = blocks.rhs;  // F = 0
    for (int i = 0; i < 6; ++i) {
      CHECK(margins[5 * i] == doctest::Approx(118.6));
      for (int r = 1; r < 5; ++r) {
        CHECK(margins[5 * i + r] == doctest::Approx(0.03 * 118.6));
      }
    }
  }

  SUBCASE("pure pull one newton past the suction force violates row 1") {
    Eigen::VectorXd f_bar = Eigen::VectorXd::Zero(36);
    f_bar[5] = -(118.6 + 1.0);  // f_z pulling the box toward the cup
    Eigen::VectorXd lhs = blocks.rows * f_bar;
    CHECK(lhs[0] - blocks.rhs[0] == doctest::Approx(1.0));
    for (int r = 5; r < 30; ++r) CHECK(lhs[r] <= blocks.rhs[r] + 1e-12);
  }

  SUBCASE("stacked test equals the printed per-cup matrix inequality") {
    std::mt19937_64 rng(23);
    auto printed = suction_loss_rows(0.03);
    for (int t = 0; t < 40; ++t) {
      Eigen::VectorXd f_bar(36);
      for (int i = 0; i < 6; ++i) {
        f_bar.segment<6>(6 * i) = testutil::random_wrench_vec(rng, 10.0, 200.0);
      }
      Eigen::VectorXd stacked = blocks.rows * f_bar - blocks.rhs;
      for (int i = 0; i < 6; ++i) {
        Vec6 shifted = f_bar.segment<6>(6 * i);
        shifted[5] += 118.6;
        Eigen::Matrix<double, 5, 1> direct = printed * shifted;
        CHECK((stacked.segment<5>(5 * i) - direct).cwiseAbs().maxCoeff() <=
              1e-12);
      }
    }
  }
}

TEST_CASE("slippage block") {
  SUBCASE("rest margins with the single-cup suction estimate") {
    auto g = grid_gripper(3, 2, 0.1, 0.03, 145.0, 0.7);
    auto block = slippage_block(g);
    for (int r = 0; r < 4; ++r) {
      CHECK(block.rhs[r] == doctest::Approx(0.7 * 6 * 145.0));
    }
  }

  SUBCASE("friction cone boundary is active at zero margin") {
    auto g = testbed6();
    auto block = slippage_block(g);
    const double cap = 0.7 * g.total_suction_force();
    Vec6 tool = Vec6::Zero();
    tool[3] = cap;  // tangential force exactly at the cone edge
    Eigen::VectorXd lhs = block.rows * tool;
    CHECK(lhs[0] - block.rhs[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(lhs[1] - block.rhs[1] == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("matches direct evaluation of the printed twelve-row inequality") {
    auto g = testbed6();
    auto block = slippage_block(g);
    const double mu = 0.7;
    const double x = g.polygon_extent_x();
    const double y = g.polygon_extent_y();
    Eigen::Matrix<double, 12, 6> printed;
    printed << 0, 0, 0, 1, 1, -mu,  //
        0, 0, 0, 1, -1, -mu,        //
        0, 0, 0, -1, 1, -mu,        //
        0, 0, 0, -1, -1, -mu,       //
        mu, mu, -1, -y, -x, -mu * (x + y),   //
        mu, -mu, -1, -y, x, -mu * (x + y),   //
        -mu, mu, -1, y, -x, -mu * (x + y),   //
        -mu, -mu, -1, y, x, -mu * (x + y),   //
        mu, mu, -1, y, x, -mu * (x + y),     //
        mu, -mu, -1, y, -x, -mu * (x + y),   //
        -mu, mu, -1, -y, x, -mu * (x + y),   //
        -mu, -mu, -1, -y, -x, -mu * (x + y);
    Vec6 psi_t = total_suction_wrench(g).vector();
    std::mt19937_64 rng(29);
    for (int t = 0; t < 40; ++t) {
      Vec6 tool = testutil::random_wrench_vec(rng, 40.0, 400.0);
      Eigen::VectorXd ours = block.rows * tool - block.rhs;
      Eigen::VectorXd direct = printed * (tool + psi_t);
      CHECK((ours - direct).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }

  SUBCASE("tilted cup normals are rejected") {
    auto g = testbed6();
    auto cups = g.cups();
    Mat3 tilt = Eigen::AngleAxisd(0.01, Vec3::UnitX()).toRotationMatrix();
    cups[2].pose_in_tool =
        RigidTransform(tilt, cups[2].pose_in_tool.translation());
    GripperModel tilted(cups, g.friction(), g.weights());
    CHECK_THROWS_AS(slippage_block(tilted), NonPlanarGripper);
  }
}

TEST_CASE("total suction wrench") {
  SUBCASE("single cup at the origin") {
    auto g = grid_gripper(1, 1, 0.1, 0.03, 100.0);
    Vec6 psi = total_suction_wrench(g).vector();
    Vec6 expect = Vec6::Zero();
    expect[5] = 100.0;
    CHECK((psi - expect).cwiseAbs().maxCoeff() <= 1e-12);
  }

  SUBCASE("symmetric pair cancels the moment") {
    auto g = grid_gripper(2, 1, 0.3);
    Vec6 psi = total_suction_wrench(g).vector();
    CHECK(psi.head<3>().cwiseAbs().maxCoeff() <= 1e-12);
  }

  SUBCASE("unequal suction forces against per-cup numeric transport") {
    auto g = testbed6();
    auto cups = g.cups();
    for (std::size_t i = 0; i < cups.size(); ++i) {
      cups[i].suction_force = 80.0 + 10.0 * static_cast<double>(i);
    }
    GripperModel uneven(cups, g.friction(), g.weights());
    Vec6 psi = total_suction_wrench(uneven).vector();
    Vec6 expect = Vec6::Zero();
    for (const auto& cup : uneven.cups()) {
      Vec6 local = Vec6::Zero();
      local[5] = cup.suction_force;
      expect += adjoint(cup.pose_in_tool.inverse()).transpose() * local;
    }
    CHECK((psi - expect).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("polygon extents never shrink when a cup is added") {
  auto g = testbed6();
  auto cups = g.cups();
  SuctionCup extra = cups[0];
  extra.pose_in_tool = RigidTransform(Mat3::Identity(), Vec3(0.05, 0.02, 0));
  cups.push_back(extra);
  GripperModel bigger(cups, g.friction(), g.weights());
  CHECK(bigger.polygon_extent_x() >= g.polygon_extent_x());
  CHECK(bigger.polygon_extent_y() >= g.polygon_extent_y());
  CHECK(g.polygon_extent_x() == doctest::Approx(0.1));
  CHECK(g.polygon_extent_y() == doctest::Approx(0.05));
}
