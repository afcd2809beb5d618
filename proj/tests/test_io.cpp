#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "mgfc/io.hpp"

using namespace mgfc;

namespace {

struct TempDir {
  std::filesystem::path dir;
  TempDir() {
    dir = std::filesystem::temp_directory_path() /
          ("mgfc_io_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
  }
  ~TempDir() { std::filesystem::remove_all(dir); }
  std::string file(const std::string& name, const std::string& content) const {
    auto p = (dir / name).string();
    std::ofstream out(p);
    out << content;
    return p;
  }
};

constexpr const char* kGripperJson = R"({
  "cups": [
    {"position_m": [0.1, 0.05, 0.0], "z_axis": [0, 0, 1],
     "pad_radius_m": 0.03, "suction_force_N": 118.6},
    {"position_m": [-0.1, -0.05, 0.0], "z_axis": [0, 0, 1],
     "pad_radius_m": 0.03, "suction_force_N": 118.6}
  ],
  "friction_mu": 0.7,
  "weights": {
    "normal": [1.0, 1.0, 2.3682],
    "compressed": [0.8369, 0.8369, 0.1321],
    "fz_threshold_N": -47.19,
    "threshold_direction": "less-than"
  }
})";

}  // namespace

TEST_CASE("gripper config round trip and schema errors") {
  TempDir tmp;
  auto path = tmp.file("gripper.json", kGripperJson);
  auto g = io::load_gripper(path);
  CHECK(g.cup_count() == 2);
  CHECK(g.friction() == doctest::Approx(0.7));
  CHECK(g.weights().normal.z() == doctest::Approx(2.3682));
  CHECK(g.polygon_extent_x() == doctest::Approx(0.1));
  CHECK(g.cups()[0].pose_in_tool.translation().x() == doctest::Approx(0.1));

  SUBCASE("missing keys are named in the error") {
    auto bad = tmp.file("bad.json", R"({"cups": [{"position_m": [0,0,0]}]})");
    try {
      io::load_gripper(bad);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("z_axis") != std::string::npos);
    }
  }

  SUBCASE("bad enum value is rejected") {
    std::string text = kGripperJson;
    auto pos = text.find("less-than");
    text.replace(pos, 9, "sideways!");
    auto bad = tmp.file("bad_enum.json", text);
    CHECK_THROWS_AS(io::load_gripper(bad), ParseError);
  }
}

TEST_CASE("object, chain, path, limits loaders") {
  TempDir tmp;
  auto obj_path = tmp.file("object.json",
                           R"({"mass_kg": 8.0, "dims_m": [0.3, 0.25, 0.2],
                               "com_offset_m": [0.0, 0.0, 0.1]})");
  auto obj = io::load_object(obj_path);
  CHECK(obj.mass == doctest::Approx(8.0));
  CHECK(obj.inertia(0, 0) ==
        doctest::Approx(8.0 / 12.0 * (0.25 * 0.25 + 0.2 * 0.2)));

  auto inertia_path = tmp.file(
      "object2.json",
      R"({"mass_kg": 2.0,
          "inertia": [[0.1, 0, 0], [0, 0.2, 0], [0, 0, 0.3]]})");
  CHECK(io::load_object(inertia_path).inertia(2, 2) == doctest::Approx(0.3));
  CHECK_THROWS_AS(io::load_object(tmp.file("o3.json", R"({"mass_kg": 1.0})")),
                  ParseError);

  auto chain_path = tmp.file("chain.json", R"({
    "joints": [
      {"axis": [0, 0, 1]},
      {"axis": [0, 1, 0], "origin_m": [0.1, 0, 0],
       "offset": {"translation_m": [0, 0, 0.5]}}
    ],
    "tool_offset": {"translation_m": [0.5, 0, 0]}
  })");
  auto chain = io::load_chain(chain_path);
  CHECK(chain.dof() == 2);
  auto t = forward_kinematics(chain, Eigen::VectorXd::Zero(2));
  CHECK((t.translation() - Vec3(0.5, 0, 0.5)).norm() <= 1e-12);

  auto path_path = tmp.file("path.json",
                            R"({"knots": [[0.0, 0.0], [0.5, -0.2], [1.0, 0.4]]})");
  auto spec = io::load_path(path_path);
  CHECK(spec.dof() == 2);
  CHECK(spec.position(1.0)[1] == doctest::Approx(0.4));

  auto limits_path = tmp.file("limits.json",
                              R"({"vel_max_rad_s": [3.0, 3.0],
                                  "acc_max_rad_s2": [8.0, 8.0]})");
  auto lim = io::load_limits(limits_path);
  CHECK(lim.has_velocity());
  CHECK_FALSE(lim.has_jerk());
}

TEST_CASE("dataset round trip") {
  TempDir tmp;
  auto g = testutil::testbed6();
  auto samples = simulate_samples(
      g, testbed_fitted_weights(),
      {(Vec6() << 1, 2, 3, 4, 5, -100).finished(),
       (Vec6() << -1, 0.5, 0, 12, -7, -250).finished()});
  auto path = (tmp.dir / "data.csv").string();
  io::write_dataset(path, samples);
  auto loaded = io::load_dataset(path, 6);
  REQUIRE(loaded.size() == 2);
  for (std::size_t s = 0; s < 2; ++s) {
    CHECK((loaded[s].tool_wrench.vector() - samples[s].tool_wrench.vector())
              .cwiseAbs()
              .maxCoeff() <= 1e-9);
    for (int i = 0; i < 6; ++i) {
      CHECK((loaded[s].cup_wrenches[i].vector() -
             samples[s].cup_wrenches[i].vector())
                .cwiseAbs()
                .maxCoeff() <= 1e-9);
    }
  }
  CHECK_THROWS_AS(io::load_dataset(path, 4), ParseError);
}

TEST_CASE("trajectory csv round trip preserves the profile") {
  TempDir tmp;
  std::vector<io::TrajectoryRow> rows(3);
  for (int k = 0; k < 3; ++k) {
    rows[k].k = k;
    rows[k].s = k / 2.0;
    rows[k].x = 0.123456789012 * k;
    rows[k].sdot = std::sqrt(rows[k].x);
    rows[k].t = 0.1 * k;
    rows[k].q = Eigen::VectorXd::Constant(2, 0.5 * k);
    rows[k].qd = Eigen::VectorXd::Zero(2);
    rows[k].qdd = Eigen::VectorXd::Zero(2);
    rows[k].active_row_label = "velocity(joint 0)@k=" + std::to_string(k);
  }
  auto path = (tmp.dir / "traj.csv").string();
  io::write_trajectory_csv(path, rows, 2);
  auto prof = io::read_trajectory_csv(path);
  REQUIRE(prof.x.size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(prof.s[k] == doctest::Approx(rows[k].s).epsilon(1e-12));
    CHECK(prof.x[k] == doctest::Approx(rows[k].x).epsilon(1e-11));
  }
}

TEST_CASE("number formatting keeps 12 significant digits") {
  CHECK(io::format_number(0.123456789012345) == "0.123456789012");
  CHECK(io::format_number(1.0) == "1");
  CHECK(io::format_number(-3.5e-7) == "-3.5e-07");
}
