#include <doctest.h>

#include <cmath>

#include "kitbash/functionality.hpp"
#include "kitbash/primitives.hpp"
#include "support/test_rng.hpp"

using namespace kitbash;
using namespace kitbash::testing;

namespace {

constexpr double kPi = 3.14159265358979323846;

KinematicPart part_with(const std::string& id, const TriMesh& mesh,
                        std::optional<std::string> parent = {},
                        std::optional<JointSpec> joint = {}) {
  KinematicPart part;
  part.id = id;
  part.mesh = mesh;
  part.parent_id = std::move(parent);
  part.joint = std::move(joint);
  return part;
}

JointSpec revolute_z(const Vec3& origin) {
  JointSpec joint;
  joint.kind = JointKind::Revolute;
  joint.axis = Vec3::UnitZ();
  joint.origin = RigidTransform::from_translation(origin);
  joint.limits = {{-kPi, kPi}};
  return joint;
}

// Planar 2-link revolute arm with unit links; effector at the tip of link2.
KinematicTree two_link_arm() {
  KinematicTree tree;
  tree.root_id = "base";
  tree.parts["base"] =
      part_with("base", make_box(Vec3(0, 0, -0.3), Vec3(0.4, 0.4, 0.2)));
  tree.parts["link1"] =
      part_with("link1", make_box(Vec3(0.5, 0, 0), Vec3(1.0, 0.1, 0.1)),
                "base", revolute_z(Vec3::Zero()));
  tree.parts["link2"] =
      part_with("link2", make_box(Vec3(1.5, 0, 0), Vec3(1.0, 0.1, 0.1)),
                "link1", revolute_z(Vec3(1, 0, 0)));
  return tree;
}

ReachTarget tip_target(const Vec3& target) {
  ReachTarget t;
  t.part_id = "link2";
  t.effector_point = Vec3(2, 0, 0);
  t.target = target;
  return t;
}

AssembledScene scene_of(const KinematicTree& tree,
                        PlacementSet placements = {},
                        std::vector<PoseVector> poses = {}) {
  AssembledScene scene;
  scene.tree = &tree;
  scene.placements = std::move(placements);
  scene.pose_set = std::move(poses);
  return scene;
}

}  // namespace

TEST_SUITE("functionality") {

TEST_CASE("ik_solve") {
  const KinematicTree tree = two_link_arm();

  SUBCASE("target at the rest effector is already solved") {
    const IkResult res = ik_solve(tree, {}, tip_target(Vec3(2, 0, 0)));
    CHECK(res.residual < 1e-12);
    CHECK(res.pose.at("link1")[0] == 0.0);
    CHECK(res.pose.at("link2")[0] == 0.0);
  }

  SUBCASE("reachable target within tolerance") {
    const IkResult res = ik_solve(tree, {}, tip_target(Vec3(1, 1, 0)));
    CHECK(res.residual < 1e-3);
    // Analytic solution family includes (0, pi/2); check the elbow angle.
    const double elbow = std::abs(res.pose.at("link2")[0]);
    CHECK(elbow == doctest::Approx(kPi / 2).epsilon(0.05));
  }

  SUBCASE("unreachable target leaves the workspace-boundary residual") {
    const IkResult res = ik_solve(tree, {}, tip_target(Vec3(3, 0, 0)));
    CHECK(res.residual == doctest::Approx(1.0).epsilon(0.01));
  }

  SUBCASE("residual trace is non-increasing") {
    const IkResult res = ik_solve(tree, {}, tip_target(Vec3(-0.5, 1.2, 0)));
    for (std::size_t i = 1; i < res.residual_trace.size(); ++i)
      CHECK(res.residual_trace[i] <= res.residual_trace[i - 1] + 1e-15);
  }

  SUBCASE("angular target drives the beam direction") {
    // theta = (pi/2, -pi/4) puts the tip at (s, 1 + s, 0) with the forearm
    // pointing along (1, 1, 0), s = sqrt(2)/2.
    const double s = std::sqrt(2.0) / 2.0;
    ReachTarget target = tip_target(Vec3(s, 1.0 + s, 0));
    AngularTarget ang;
    ang.axis = Vec3(1, 1, 0).normalized();
    ang.local_axis = Vec3(1, 0, 0);  // beam along the forearm
    ang.max_deviation_deg = 0.0;
    target.angular_target = ang;
    const IkResult res = ik_solve(tree, {}, target);
    CHECK(res.residual < 5e-3);
  }

  SUBCASE("no joints on the chain") {
    ReachTarget target;
    target.part_id = "base";
    target.target = Vec3(1, 0, 0);
    CHECK_THROWS_AS(ik_solve(tree, {}, target), NoDofOnChain);
  }

  SUBCASE("placements move the chain") {
    PlacementSet placements;
    placements["link1"] = RigidTransform::from_translation(Vec3(0, 0, 1));
    placements["link2"] = RigidTransform::from_translation(Vec3(0, 0, 1));
    const IkResult res =
        ik_solve(tree, placements, tip_target(Vec3(1, 1, 1)));
    CHECK(res.residual < 1e-3);
  }
}

TEST_CASE("reach_objective") {
  const KinematicTree tree = two_link_arm();

  SUBCASE("satisfied targets evaluate to zero") {
    const Objective obj =
        reach_objective({tip_target(Vec3(1, 1, 0)), tip_target(Vec3(2, 0, 0))});
    CHECK(obj(scene_of(tree)) < 1e-6);
  }

  SUBCASE("boundary excess is squared") {
    const Objective obj = reach_objective({tip_target(Vec3(2.5, 0, 0))});
    CHECK(obj(scene_of(tree)) == doctest::Approx(0.25).epsilon(0.02));
  }

  SUBCASE("duplicate targets double the value") {
    const ReachTarget t = tip_target(Vec3(3, 0, 0));
    const double one = reach_objective({t})(scene_of(tree));
    const double two = reach_objective({t, t})(scene_of(tree));
    CHECK(two == doctest::Approx(2.0 * one).epsilon(1e-9));
  }

  CHECK_THROWS_AS(reach_objective({}), EmptyInput);
}

TEST_CASE("collision_penetration") {
  const TriMesh cube_a = make_box(Vec3::Zero(), Vec3::Ones());

  SUBCASE("disjoint pair is exactly zero") {
    const TriMesh cube_b = make_box(Vec3(1.5, 0, 0), Vec3::Ones());
    CHECK(collision_penetration({cube_a, cube_b}) == 0.0);
  }

  SUBCASE("axis overlap depth") {
    const TriMesh cube_b = make_box(Vec3(0.7, 0, 0), Vec3::Ones());
    CHECK(collision_penetration({cube_a, cube_b}) ==
          doctest::Approx(0.3).epsilon(0.1));
  }

  SUBCASE("coincident cubes read the full extent") {
    CHECK(collision_penetration({cube_a, cube_a}) ==
          doctest::Approx(1.0).epsilon(0.1));
  }

  SUBCASE("symmetric in mesh order and rigid-motion invariant") {
    Rng rng(81);
    const TriMesh cube_b = make_box(Vec3(0.6, 0.2, -0.1), Vec3::Ones());
    const double ab = collision_penetration({cube_a, cube_b});
    const double ba = collision_penetration({cube_b, cube_a});
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    const RigidTransform g = random_transform(rng, 1.5);
    const double moved = collision_penetration(
        {cube_a.transformed(g), cube_b.transformed(g)});
    CHECK(moved == doctest::Approx(ab).epsilon(0.1));
  }

  CHECK_THROWS_AS(collision_penetration({cube_a}), ValidationError);
}

TEST_CASE("pack_objective") {
  // Board with a hinged lid; both fit in a unit-half-extent box at rest.
  KinematicTree tree;
  tree.root_id = "board";
  tree.parts["board"] =
      part_with("board", make_box(Vec3::Zero(), Vec3(0.8, 0.6, 0.1)));
  JointSpec hinge;
  hinge.kind = JointKind::Revolute;
  hinge.axis = Vec3::UnitY();
  hinge.origin = RigidTransform::from_translation(Vec3(0.4, 0, 0.1));
  hinge.limits = {{0.0, kPi}};
  tree.parts["lid"] = part_with(
      "lid", make_box(Vec3(0.15, 0, 0.15), Vec3(0.5, 0.6, 0.1)), "board",
      hinge);

  PackSpec spec;
  spec.box_half_extent = 0.75;
  CollisionParams params;
  params.surface_samples = 128;

  SUBCASE("contained and contact-free scene scores zero") {
    CHECK(pack_objective(spec, params)(scene_of(tree)) == 0.0);
  }

  SUBCASE("protrusion is squared box excess") {
    PackSpec tight;
    tight.box_half_extent = 0.75;
    PlacementSet placements;
    // lid spans x in [0.45, 0.95]: 0.2 beyond the +x face, lifted clear of
    // the board
    placements["lid"] = RigidTransform::from_translation(Vec3(0.55, 0, 0.4));
    const double value =
        pack_objective(tight, params)(scene_of(tree, placements));
    CHECK(value == doctest::Approx(0.04).epsilon(1e-6));
  }

  SUBCASE("shrinking the box is monotone") {
    double prev = -1.0;
    for (double half : {0.75, 0.6, 0.5, 0.4, 0.3}) {
      PackSpec shrunk;
      shrunk.box_half_extent = half;
      const double value =
          pack_objective(shrunk, params)(scene_of(tree));
      if (prev >= 0.0) CHECK(value >= prev - 1e-12);
      prev = value;
    }
    CHECK(prev > 0.0);
  }

  SUBCASE("parent-child contact is tolerated, deep overlap is not") {
    PlacementSet grazing;
    grazing["lid"] = RigidTransform::from_translation(Vec3(0, 0, -0.0505));
    CHECK(pack_objective(spec, params)(scene_of(tree, grazing)) == 0.0);

    PlacementSet deep;
    deep["lid"] = RigidTransform::from_translation(Vec3(0, 0, -0.12));
    CHECK(pack_objective(spec, params)(scene_of(tree, deep)) > 0.0);
  }
}

TEST_CASE("trajectory_objective") {
  const KinematicTree tree = two_link_arm();

  SUBCASE("reachable waypoints track tightly") {
    Trajectory traj;
    traj.part_id = "link2";
    traj.effector_point = Vec3(2, 0, 0);
    traj.waypoints = {{0.0, Vec3(2, 0, 0)},
                      {0.5, Vec3(std::sqrt(2.0), std::sqrt(2.0), 0)},
                      {1.0, Vec3(0, 2, 0)}};
    CHECK(trajectory_objective(traj)(scene_of(tree)) < 1e-4);
  }

  SUBCASE("constant trajectory at the rest effector is zero") {
    Trajectory traj;
    traj.part_id = "link2";
    traj.effector_point = Vec3(2, 0, 0);
    traj.waypoints = {{0.0, Vec3(2, 0, 0)}, {1.0, Vec3(2, 0, 0)}};
    CHECK(trajectory_objective(traj)(scene_of(tree)) < 1e-20);
  }

  SUBCASE("zero-dof chain errors") {
    Trajectory traj;
    traj.part_id = "base";
    traj.waypoints = {{0.0, Vec3(1, 0, 0)}, {1.0, Vec3(0, 1, 0)}};
    const Objective obj = trajectory_objective(traj);
    CHECK_THROWS_AS(obj(scene_of(tree)), NoDofOnChain);
  }

  SUBCASE("waypoint validation") {
    Trajectory traj;
    traj.part_id = "link2";
    traj.waypoints = {{0.5, Vec3::Zero()}, {0.25, Vec3::Zero()}};
    CHECK_THROWS_AS(trajectory_objective(traj), ValidationError);
    traj.waypoints = {{0.5, Vec3::Zero()}};
    CHECK_THROWS_AS(trajectory_objective(traj), ValidationError);
  }
}

TEST_CASE("combine_objectives") {
  const KinematicTree tree = two_link_arm();
  const Objective two_obj = [](const AssembledScene&) { return 2.0; };
  const Objective three_obj = [](const AssembledScene&) { return 3.0; };

  const Objective single = combine_objectives({{two_obj, 1.0}});
  CHECK(single(scene_of(tree)) == 2.0);

  const Objective weighted = combine_objectives({{two_obj, 1.0}, {three_obj, 2.0}});
  CHECK(weighted(scene_of(tree)) == 8.0);

  const Objective permuted = combine_objectives({{three_obj, 2.0}, {two_obj, 1.0}});
  CHECK(std::abs(weighted(scene_of(tree)) - permuted(scene_of(tree))) <
        1e-12);

  CHECK_THROWS_AS(combine_objectives({{two_obj, -1.0}}), ValidationError);
}

TEST_CASE("objectives do not mutate the scene") {
  const KinematicTree tree = two_link_arm();
  AssembledScene scene = scene_of(tree);
  scene.placements["link1"] = RigidTransform::from_translation(Vec3(0, 0, 1));
  const PlacementSet before = scene.placements;
  const std::vector<PoseVector> before_poses = scene.pose_set;

  reach_objective({tip_target(Vec3(1, 1, 1))})(scene);
  PackSpec spec;
  CollisionParams params;
  params.surface_samples = 64;
  pack_objective(spec, params)(scene);

  CHECK(scene.placements.size() == before.size());
  for (const auto& [id, t] : before)
    CHECK((scene.placements.at(id).matrix() - t.matrix()).norm() == 0.0);
  CHECK(scene.pose_set.size() == before_poses.size());
}

}  // TEST_SUITE("functionality")
