#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "kitbash/priors.hpp"
#include "kitbash/primitives.hpp"
#include "support/test_rng.hpp"

using namespace kitbash;
using namespace kitbash::testing;

TEST_SUITE("priors") {

TEST_CASE("pin_energy") {
  const TriMesh cube = make_box(Vec3(1, 2, 3), Vec3::Ones());

  PinConstraint pin;
  pin.part_id = "cube";
  pin.target = Vec3(1, 2, 3);
  pin.weight = 1.0;
  CHECK(pin_energy(pin, RigidTransform::identity(), cube) < 1e-24);

  pin.target = Vec3(1, 2, 3) + Vec3(3, 4, 0);
  CHECK(pin_energy(pin, RigidTransform::identity(), cube) ==
        doctest::Approx(25.0).epsilon(1e-12));

  // Quadratic law against a direct centroid computation.
  Rng rng(71);
  pin.weight = 2.5;
  for (int i = 0; i < 20; ++i) {
    const RigidTransform placement = random_transform(rng);
    const Vec3 com = placement.apply(surface_centroid(cube));
    const double want = pin.weight * (com - pin.target).squaredNorm();
    CHECK(pin_energy(pin, placement, cube) ==
          doctest::Approx(want).epsilon(1e-12));
  }

  pin.weight = -1.0;
  CHECK_THROWS_AS(pin_energy(pin, RigidTransform::identity(), cube),
                  ValidationError);
}

TEST_CASE("prior_energy") {
  Rng rng(72);
  const double sigma = 0.3;

  SUBCASE("mode value for a single exemplar") {
    const RigidTransform exemplar = random_transform(rng, 1.5);
    const TransformPrior prior = fit_prior({exemplar}, sigma);
    const double want = -std::log(1.0 / std::sqrt(2.0 * M_PI * sigma * sigma));
    CHECK(prior_energy(prior, exemplar) == doctest::Approx(want).epsilon(1e-12));
  }

  SUBCASE("two-exemplar mixture matches a direct sum") {
    for (int trial = 0; trial < 20; ++trial) {
      const RigidTransform a = random_transform(rng, 1.0);
      const RigidTransform b = random_transform(rng, 1.0);
      const RigidTransform query = random_transform(rng, 1.0);
      const TransformPrior prior = fit_prior({a, b}, sigma);
      const double norm = 1.0 / std::sqrt(2.0 * M_PI * sigma * sigma);
      const double da = geodesic_norm(a, query);
      const double db = geodesic_norm(b, query);
      const double want = -std::log(
          0.5 * norm *
          (std::exp(-da * da / (2 * sigma * sigma)) +
           std::exp(-db * db / (2 * sigma * sigma))));
      CHECK(prior_energy(prior, query) == doctest::Approx(want).epsilon(1e-10));
    }
  }

  SUBCASE("monotone along a geodesic ray from a single exemplar") {
    const RigidTransform exemplar = random_transform(rng, 1.0);
    const TransformPrior prior = fit_prior({exemplar}, sigma);
    Twist dir;
    dir.omega = 0.12 * rng.unit_vector();
    dir.rho = 0.2 * rng.normal3();
    double prev = prior_energy(prior, exemplar);
    for (int k = 1; k <= 20; ++k) {
      const double cur = prior_energy(
          prior, exemplar * se3_exp(Twist::from_vector(
                                k * dir.vector())));
      CHECK(cur >= prev - 1e-12);
      prev = cur;
    }
  }

  SUBCASE("duplicated exemplars leave the density unchanged") {
    const RigidTransform a = random_transform(rng, 1.0);
    const RigidTransform b = random_transform(rng, 1.0);
    const RigidTransform query = random_transform(rng, 0.5);
    const TransformPrior once = fit_prior({a, b}, sigma);
    const TransformPrior twice = fit_prior({a, b, a, b}, sigma);
    CHECK(prior_energy(once, query) ==
          doctest::Approx(prior_energy(twice, query)).epsilon(1e-12));
  }

  SUBCASE("invariant under composing everything so relatives are unchanged") {
    // The density depends on exemplar^-1 * placement only, so composing a
    // fixed transform on the left of every exemplar and the placement leaves
    // it unchanged.
    for (int trial = 0; trial < 20; ++trial) {
      const RigidTransform a = random_transform(rng, 1.0);
      const RigidTransform b = random_transform(rng, 1.0);
      const RigidTransform query = random_transform(rng, 0.8);
      const RigidTransform g = random_transform(rng, 1.5);
      const TransformPrior prior = fit_prior({a, b}, sigma);
      const TransformPrior shifted = fit_prior({g * a, g * b}, sigma);
      CHECK(std::abs(prior_energy(prior, query) -
                     prior_energy(shifted, g * query)) < 1e-9);
    }
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(fit_prior({}, sigma), EmptyInput);
    CHECK_THROWS_AS(fit_prior({RigidTransform::identity()}, -1.0),
                    ValidationError);
    const TransformPrior prior =
        fit_prior({RigidTransform::identity()}, sigma);
    RigidTransform antipode;
    antipode.rotation = so3_exp((M_PI - 1e-8) * Vec3::UnitX());
    CHECK_THROWS_AS(prior_energy(prior, antipode), AngleNearPi);
  }
}

TEST_CASE("exemplar file io") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "kitbash_priors_test";
  fs::create_directories(dir);
  const fs::path path = dir / "exemplars.json";
  {
    std::ofstream out(path);
    out << R"([
      {"parent_label": "chassis", "child_label": "wheel",
       "rotation_axis_angle": [0, 0, 0.7853982], "translation": [0.4, 0, -0.2]},
      {"parent_label": "chassis", "child_label": "wheel",
       "rotation_axis_angle": [0, 0, -0.7853982], "translation": [-0.4, 0, -0.2]},
      {"parent_label": "cabinet", "child_label": "door",
       "rotation_axis_angle": [0, 0, 0], "translation": [0, 0.3, 0]}
    ])";
  }

  const auto exemplars = load_prior_exemplars(path.string());
  REQUIRE(exemplars.size() == 3);
  CHECK(exemplars[0].child_label == "wheel");

  const TransformPrior wheels =
      prior_for_labels(exemplars, "chassis", "wheel", 0.3);
  CHECK(wheels.exemplars.size() == 2);
  // Density at one of the recorded transforms is the two-term mixture value.
  const RigidTransform query{so3_exp(Vec3(0, 0, 0.7853982)),
                             Vec3(0.4, 0, -0.2)};
  CHECK(prior_energy(wheels, query) < prior_energy(wheels, RigidTransform::identity()));

  CHECK_THROWS_AS(prior_for_labels(exemplars, "chassis", "leg", 0.3),
                  EmptyInput);
  CHECK_THROWS_AS(load_prior_exemplars("/nonexistent.json"), MissingFile);

  {
    std::ofstream out(path);
    out << "{\"not\": \"an array\"}";
  }
  CHECK_THROWS_AS(load_prior_exemplars(path.string()), SchemaError);
  fs::remove_all(dir);
}

}  // TEST_SUITE("priors")
