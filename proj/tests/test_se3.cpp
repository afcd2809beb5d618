#include <doctest.h>

#include "helpers.hpp"

using namespace mgfc;
using testutil::random_rotation;
using testutil::random_transform;
using testutil::random_vec3;

TEST_CASE("skew matrix matches the componentwise cross product") {
  CHECK(skew(Vec3::Zero()).isZero(0.0));
  CHECK((skew(Vec3::UnitX()) * Vec3::UnitY() - Vec3::UnitZ()).norm() == 0.0);

  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    Vec3 v = random_vec3(rng, 2.0);
    Vec3 w = random_vec3(rng, 2.0);
    CHECK((skew(v) * w - v.cross(w)).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((skew(v) + skew(v).transpose()).isZero(0.0));
    CHECK((skew(v) * v).norm() <= 1e-15);
  }
}

TEST_CASE("compose matches sequential point application") {
  std::mt19937_64 rng(11);
  RigidTransform t = random_transform(rng);

  SUBCASE("identity cases") {
    RigidTransform id;
    CHECK((compose(id, t).rotation() - t.rotation()).norm() <= 1e-15);
    CHECK((compose(id, t).translation() - t.translation()).norm() <= 1e-15);
    RigidTransform round = compose(t, t.inverse());
    CHECK((round.rotation() - Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(round.translation().norm() <= 1e-12);
  }

  SUBCASE("pointwise application oracle") {
    RigidTransform a = random_transform(rng);
    RigidTransform b = random_transform(rng);
    RigidTransform ab = compose(a, b);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      Vec3 p = random_vec3(rng, 3.0);
      worst = std::max(worst, (ab.apply(p) - a.apply(b.apply(p))).norm());
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("adjoint structure and power pairing") {
  CHECK((adjoint(RigidTransform()) - Mat6::Identity()).norm() == 0.0);

  std::mt19937_64 rng(13);
  Mat3 r = random_rotation(rng);
  Mat6 ad = adjoint(RigidTransform(r, Vec3::Zero()));
  CHECK((ad.topLeftCorner<3, 3>() - r).norm() <= 1e-15);
  CHECK((ad.bottomRightCorner<3, 3>() - r).norm() <= 1e-15);
  CHECK(ad.bottomLeftCorner<3, 3>().isZero(0.0));
  CHECK(ad.topRightCorner<3, 3>().isZero(0.0));

  SUBCASE("pairing invariance over random transforms") {
    for (int t = 0; t < 100; ++t) {
      RigidTransform x = random_transform(rng);
      Vec6 f = testutil::random_wrench_vec(rng, 2.0, 5.0);
      Vec6 v = testutil::random_wrench_vec(rng, 1.0, 1.0);
      // F_a = Ad(T_b^a)' F_b with T_b^a the inverse of T_a^b.
      Vec6 fa = adjoint(x.inverse()).transpose() * f;
      Vec6 va = adjoint(x) * v;
      CHECK(std::abs(fa.dot(va) - f.dot(v)) <= 1e-12 * (1.0 + f.norm() * v.norm()));
    }
  }

  SUBCASE("adjoint of a composition is the product of adjoints") {
    for (int t = 0; t < 20; ++t) {
      RigidTransform a = random_transform(rng);
      RigidTransform b = random_transform(rng);
      Mat6 lhs = adjoint(compose(a, b));
      Mat6 rhs = adjoint(a) * adjoint(b);
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("rotation validation") {
  Mat3 bad = Mat3::Identity();
  bad(0, 1) = 0.5;
  CHECK_THROWS_AS(RigidTransform(bad, Vec3::Zero()), Error);

  // Small drift is repaired by polar projection.
  std::mt19937_64 rng(17);
  Mat3 r = random_rotation(rng);
  Mat3 drifted = r + 5e-8 * Mat3::Ones();
  RigidTransform t(drifted, Vec3::Zero());
  CHECK((t.rotation().transpose() * t.rotation() - Mat3::Identity())
            .cwiseAbs()
            .maxCoeff() <= 1e-12);
}
