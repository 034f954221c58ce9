#include <doctest.h>

#include <cmath>

#include "kitbash/lie.hpp"
#include "support/oracles.hpp"
#include "support/test_rng.hpp"

using namespace kitbash;
using namespace kitbash::testing;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_SUITE("lie") {

TEST_CASE("so3_exp basics") {
  CHECK((so3_exp(Vec3::Zero()).matrix() - Mat3::Identity()).norm() == 0.0);
  const Rotation quarter_x = so3_exp(Vec3(kPi / 2, 0, 0));
  CHECK((quarter_x * Vec3(0, 1, 0) - Vec3(0, 0, 1)).norm() < 1e-12);
}

TEST_CASE("so3 exp/log roundtrip over seeded draws") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 axis = rng.unit_vector();
    const double angle = rng.uniform(1e-9, kPi - 1e-3);
    const Vec3 omega = angle * axis;
    CHECK((so3_log(so3_exp(omega)) - omega).norm() < 1e-9);
  }
}

TEST_CASE("so3_log branches") {
  CHECK(so3_log(Rotation::identity()).norm() == 0.0);

  // Antipodal: axis sign convention makes the largest component positive.
  const Vec3 log_pi_z = so3_log(so3_exp(Vec3(0, 0, kPi)));
  CHECK((log_pi_z - Vec3(0, 0, kPi)).norm() < 1e-9);
  const Vec3 log_pi_negz = so3_log(so3_exp(Vec3(0, 0, -kPi)));
  CHECK((log_pi_negz - Vec3(0, 0, kPi)).norm() < 1e-9);

  Rng rng(12);
  for (int i = 0; i < 500; ++i) {
    const Rotation r = random_rotation(rng, kPi - 1e-4);
    CHECK((so3_exp(so3_log(r)).matrix() - r.matrix()).norm() < 1e-9);
  }
}

TEST_CASE("se3 exp/log") {
  const RigidTransform pure =
      se3_exp(Twist{Vec3::Zero(), Vec3(1, 2, 3)});
  CHECK((pure.translation - Vec3(1, 2, 3)).norm() == 0.0);
  CHECK((pure.rotation.matrix() - Mat3::Identity()).norm() == 0.0);

  CHECK(se3_log(RigidTransform::identity()).norm() == 0.0);

  Rng rng(13);
  for (int i = 0; i < 1000; ++i) {
    Twist t;
    t.omega = rng.uniform(0.0, 3.0) * rng.unit_vector();
    t.rho = 2.0 * rng.normal3();
    const Twist back = se3_log(se3_exp(t));
    CHECK((back.vector() - t.vector()).norm() < 1e-9);
  }

  RigidTransform near_pi;
  near_pi.rotation = so3_exp((kPi - 1e-7) * Vec3::UnitX());
  CHECK_THROWS_AS(se3_log(near_pi), AngleNearPi);
}

TEST_CASE("geodesic_norm") {
  Rng rng(14);
  const RigidTransform t = random_transform(rng);
  CHECK(geodesic_norm(t, t) < 1e-12);

  CHECK(geodesic_norm(RigidTransform::identity(),
                      RigidTransform::from_translation(Vec3(3, 4, 0))) ==
        doctest::Approx(5.0).epsilon(1e-12));

  // Direct composition oracle: B = A * Exp(t) has distance ||t|| exactly.
  for (int i = 0; i < 200; ++i) {
    const RigidTransform a = random_transform(rng);
    Twist tw;
    tw.omega = rng.uniform(0.0, 2.5) * rng.unit_vector();
    tw.rho = rng.normal3();
    const RigidTransform b = a * se3_exp(tw);
    CHECK(geodesic_norm(a, b) == doctest::Approx(tw.norm()).epsilon(1e-9));
    CHECK(geodesic_norm(a, b) ==
          doctest::Approx(geodesic_norm(b, a)).epsilon(1e-9));
  }
}

TEST_CASE("geodesic triangle inequality in a unit ball") {
  Rng rng(15);
  auto draw = [&] {
    Twist t;
    const double norm = rng.uniform(0.0, 1.0);
    Vec6 dir;
    for (int k = 0; k < 6; ++k) dir[k] = rng.normal();
    dir.normalize();
    return se3_exp(Twist::from_vector(norm * dir));
  };
  for (int i = 0; i < 10000; ++i) {
    const RigidTransform a = draw(), b = draw(), c = draw();
    CHECK(geodesic_norm(a, c) <=
          geodesic_norm(a, b) + geodesic_norm(b, c) + 1e-9);
  }
}

TEST_CASE("lie_mean basics") {
  Rng rng(16);
  const RigidTransform t = random_transform(rng);
  const std::vector<RigidTransform> constant{t, t, t};
  CHECK(geodesic_norm(lie_mean(constant), t) < 1e-12);

  const std::vector<RigidTransform> singleton{t};
  const RigidTransform single_mean = lie_mean(singleton);
  CHECK((single_mean.matrix() - t.matrix()).norm() == 0.0);

  const std::vector<RigidTransform> translations{
      RigidTransform::from_translation(Vec3(1, 0, 0)),
      RigidTransform::from_translation(Vec3(3, 0, 0))};
  CHECK((lie_mean(translations).translation - Vec3(2, 0, 0)).norm() < 1e-12);

  CHECK_THROWS_AS(lie_mean(std::vector<RigidTransform>{}), EmptyInput);
}

TEST_CASE("lie_mean near-optimality against a Karcher oracle") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const RigidTransform base = random_transform(rng, 2.0);
    std::vector<RigidTransform> cluster;
    for (int i = 0; i < 5; ++i) {
      Twist t;
      t.omega = rng.uniform(0.0, 0.15) * rng.unit_vector();
      t.rho = 0.1 * rng.normal3();
      cluster.push_back(base * se3_exp(t));
    }
    const RigidTransform mean = lie_mean(cluster);
    const RigidTransform karcher = karcher_mean_oracle(cluster);
    auto objective = [&](const RigidTransform& m) {
      double acc = 0.0;
      for (const auto& t : cluster) {
        const double d = geodesic_norm(m, t);
        acc += d * d;
      }
      return acc;
    };
    CHECK(objective(mean) <= objective(karcher) + 1e-4);
  }
}

TEST_CASE("lie_mean left equivariance") {
  Rng rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    const RigidTransform base = random_transform(rng, 1.5);
    const RigidTransform g = random_transform(rng, 2.0);
    std::vector<RigidTransform> cluster, shifted;
    for (int i = 0; i < 6; ++i) {
      Twist t;
      t.omega = rng.uniform(0.0, 0.4) * rng.unit_vector();
      t.rho = 0.4 * rng.normal3();
      cluster.push_back(base * se3_exp(t));
      shifted.push_back(g * cluster.back());
    }
    CHECK(geodesic_norm(lie_mean(shifted), g * lie_mean(cluster)) < 1e-8);
  }
}

TEST_CASE("igso3 density matches high-precision reference values") {
  // Frozen from a 60-digit evaluation of the truncated series.
  const Igso3Params half{0.5, 200};
  CHECK(igso3_density(0.05, half) ==
        doctest::Approx(41.177064904636605).epsilon(1e-10));
  CHECK(igso3_density(0.3, half) ==
        doctest::Approx(34.692727122343962).epsilon(1e-10));
  CHECK(igso3_density(1.0, half) ==
        doctest::Approx(5.8403852449754664).epsilon(1e-10));
  CHECK(igso3_density(2.0, half) ==
        doctest::Approx(0.016496302760824688).epsilon(1e-8));

  const Igso3Params tight{0.095, 200};
  CHECK(igso3_density(0.3, tight) ==
        doctest::Approx(40.143166752584415).epsilon(1e-8));
  // True value ~5e-21; double precision can only cancel down to noise level.
  CHECK(std::abs(igso3_density(1.0, tight)) < 1e-7);
}

TEST_CASE("igso3 density normalizes over SO(3)") {
  for (double scale : {0.1, 0.5, 1.0}) {
    const Igso3Params params{scale, 200};
    const double mass = simpson(
        [&](double w) {
          return igso3_density(w, params) * (1.0 - std::cos(w)) / kPi;
        },
        0.0, kPi, 4096);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("igso3 sampling concentrates as scale -> 0") {
  const Igso3Params params{1e-3, 200};
  Rng rng(19);
  double mean_angle = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i)
    mean_angle += igso3_sample(params, rng).angle();
  mean_angle /= draws;
  CHECK(mean_angle < 1e-2);
}

TEST_CASE("igso3 sample histogram matches the series density") {
  const Igso3Params params{0.5, 200};
  const int draws = 100000;
  const int bins = 40;
  Rng rng(20);
  std::vector<int> observed(bins, 0);
  for (int i = 0; i < draws; ++i) {
    const double angle = igso3_sample(params, rng).angle();
    int b = static_cast<int>(angle / kPi * bins);
    b = std::min(b, bins - 1);
    ++observed[b];
  }
  std::vector<double> expected(bins);
  for (int b = 0; b < bins; ++b) {
    expected[b] = draws * simpson(
                              [&](double w) {
                                return igso3_angle_pdf(w, params);
                              },
                              kPi * b / bins, kPi * (b + 1) / bins, 64);
  }
  // Merge sparse tail bins so every cell has expected count >= 5.
  double stat = 0.0;
  int cells = 0;
  double obs_acc = 0.0, exp_acc = 0.0;
  for (int b = 0; b < bins; ++b) {
    obs_acc += observed[b];
    exp_acc += expected[b];
    if (exp_acc >= 5.0) {
      stat += (obs_acc - exp_acc) * (obs_acc - exp_acc) / exp_acc;
      ++cells;
      obs_acc = exp_acc = 0.0;
    }
  }
  if (exp_acc > 0.0) {
    stat += obs_acc * obs_acc / std::max(exp_acc, 1e-9);
    ++cells;
  }
  const double critical = chi2_critical(2.326348, cells - 1);  // p = 0.01
  CHECK(stat < critical);
}

TEST_CASE("igso3 sampling is deterministic for a fixed seed") {
  const Igso3Params params{0.3, 200};
  const Rotation a = igso3_sample(params, 1234u);
  const Rotation b = igso3_sample(params, 1234u);
  CHECK((a.matrix() - b.matrix()).norm() == 0.0);
}

TEST_CASE("igso3 log-density gradient") {
  const Igso3Params params{0.5, 200};
  Rng rng(21);

  SUBCASE("zero at the mode") {
    const Rotation base = random_rotation(rng);
    CHECK(igso3_log_density_grad(base, base, params).norm() < 1e-6);
  }

  SUBCASE("points back toward the base along the geodesic") {
    for (int i = 0; i < 100; ++i) {
      const Rotation base = random_rotation(rng);
      const Vec3 delta = rng.uniform(0.05, 1.0) * rng.unit_vector();
      const Rotation r = so3_exp(delta) * base;
      const Vec3 grad = igso3_log_density_grad(r, base, params);
      const Vec3 rel_log = so3_log(r * base.inverse());
      CHECK(grad.dot(rel_log) < 0.0);
    }
  }

  SUBCASE("matches the analytic series derivative") {
    for (int i = 0; i < 50; ++i) {
      const Rotation base = random_rotation(rng);
      const double angle = rng.uniform(0.1, 2.5);
      const Vec3 axis = rng.unit_vector();
      const Rotation r = so3_exp(angle * axis) * base;
      const Vec3 grad = igso3_log_density_grad(r, base, params);
      const Vec3 rel_axis = so3_log(r * base.inverse()).normalized();
      const Vec3 analytic =
          igso3_series_dlog_oracle(angle, params.scale, params.series_terms) *
          rel_axis;
      CHECK((grad - analytic).norm() <= 1e-3 * std::max(analytic.norm(), 1.0));
    }
  }

  SUBCASE("near-pi relative rotation is rejected") {
    const Rotation base = Rotation::identity();
    const Rotation r = so3_exp((kPi - 1e-4) * Vec3::UnitZ());
    CHECK_THROWS_AS(igso3_log_density_grad(r, base, params), AngleNearPi);
  }
}

TEST_CASE("rotation validation") {
  Mat3 bad = Mat3::Identity();
  bad(0, 0) = 1.1;
  CHECK_THROWS(Rotation::from_matrix(bad));
  CHECK_NOTHROW(Rotation::from_matrix(so3_exp(Vec3(0.3, -0.2, 1.0)).matrix()));
}

}  // TEST_SUITE("lie")
