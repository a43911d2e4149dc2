#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "semmap/semantic_map.hpp"
#include "semmap/spatial_hash.hpp"

using namespace semmap;

namespace {

PointCloud cube_cloud(const Vec3& center, double side = 0.1, int per_axis = 8) {
  PointCloud c(Frame::World);
  for (int i = 0; i < per_axis; ++i)
    for (int j = 0; j < per_axis; ++j)
      for (int k = 0; k < per_axis; ++k)
        c.points.push_back(center + side * (Vec3(i, j, k) / (per_axis - 1) - Vec3::Constant(0.5)));
  return c;
}

SemanticMap map_with_keyframes(int n, MapConfig config = {}) {
  SemanticMap map(config);
  for (int i = 0; i < n; ++i) map.add_keyframe({i, RigidPose::identity(), i});
  return map;
}

/// Same-class pairs whose overlap meets the merge ratio.
int overlapping_pairs(const SemanticMap& map) {
  int n = 0;
  for (auto a = map.objects().begin(); a != map.objects().end(); ++a)
    for (auto b = std::next(a); b != map.objects().end(); ++b)
      if (a->second.class_label == b->second.class_label &&
          oracle::overlap_brute(a->second.world, b->second.world, map.config().overlap_radius) >=
              map.config().merge_overlap_ratio)
        ++n;
  return n;
}

void check_cache_consistent(const SemanticObject& o, const KeyframeStore& kfs) {
  std::vector<Vec3> expected;
  for (const auto& obs : o.observations)
    for (const auto& p : obs.local.points) expected.push_back(kfs.at(obs.keyframe).pose.apply(p));
  REQUIRE(o.world.size() == expected.size());
  Vec3 mean = Vec3::Zero();
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK((o.world.points[i] - expected[i]).norm() < 1e-9);
    mean += expected[i];
    CHECK(o.aabb.contains(expected[i], 1e-12));
  }
  CHECK((o.centroid - mean / double(expected.size())).norm() < 1e-9);
}

}  // namespace

TEST_CASE("chamfer examples") {
  const PointCloud a = cube_cloud({0, 0, 0});
  CHECK(chamfer_distance(a, a) == 0.0);
  CHECK(chamfer_distance(PointCloud(Frame::World, {{0, 0, 0}}), PointCloud(Frame::World, {{1, 0, 0}})) ==
        doctest::Approx(1.0));
  CHECK(chamfer_distance(PointCloud(Frame::World, {{0, 0, 0}, {1, 0, 0}}), PointCloud(Frame::World, {{0, 0, 0}})) ==
        doctest::Approx(0.25));
}

TEST_CASE("chamfer error paths") {
  CHECK_THROWS_AS(chamfer_distance(PointCloud(Frame::World), cube_cloud({0, 0, 0})), Error);
  PointCloud local(Frame::KeyframeLocal, {{0, 0, 0}});
  CHECK_THROWS_AS(chamfer_distance(local, cube_cloud({0, 0, 0})), Error);
}

TEST_CASE("property: chamfer and overlap equal brute force exactly") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> n(1, 300);
  std::uniform_real_distribution<double> extent(0.01, 3.0), shift(-1.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const PointCloud a = oracle::random_cloud(rng, n(rng), extent(rng));
    const PointCloud b = oracle::random_cloud(rng, n(rng), extent(rng), Vec3(shift(rng), shift(rng), shift(rng)));
    const double fast = chamfer_distance(a, b);
    CHECK(fast == oracle::chamfer_brute(a, b));
    CHECK(fast == chamfer_distance(b, a));
    CHECK(fast >= 0.0);
    CHECK(overlap_ratio(a, b, 0.05) == oracle::overlap_brute(a, b, 0.05));
  }
}

TEST_CASE("property: spatial hash nearest equals linear scan across cell sizes") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> q(-2.0, 3.0);
  const PointCloud c = oracle::random_cloud(rng, 250, 1.0);
  for (double cell : {0.001, 0.05, 0.3, 5.0}) {
    const SpatialHash hash(c.points, cell);
    for (int i = 0; i < 200; ++i) {
      const Vec3 p(q(rng), q(rng), q(rng));
      double best = std::numeric_limits<double>::infinity();
      for (const auto& x : c.points) best = std::min(best, (x - p).norm());
      CHECK(hash.nearest(p).distance == best);
      CHECK(hash.any_within(p, 0.1) == (best <= 0.1));
    }
  }
}

TEST_CASE("associate examples") {
  SemanticMap map = map_with_keyframes(2);
  const PointCloud cup = cube_cloud({0, 0, 1});
  CHECK_FALSE(map.associate(cup, "cup").has_value());
  const auto reg = map.register_candidate(cup, "cup", 0);
  CHECK(reg.created);
  PointCloud shifted = cup;
  for (auto& p : shifted.points) p += Vec3(0.05, 0, 0);
  const double d = chamfer_distance(shifted, map.object(reg.object).world);
  CHECK(d < 0.3);
  CHECK(map.associate(shifted, "cup") == reg.object);
  CHECK_FALSE(map.associate(cup, "book").has_value());
}

TEST_CASE("register: same cloud twice gives one object with two observations") {
  SemanticMap map = map_with_keyframes(2);
  const PointCloud cup = cube_cloud({0, 0, 1});
  const auto a = map.register_candidate(cup, "cup", 0);
  const auto b = map.register_candidate(cup, "cup", 1);
  CHECK(a.created);
  CHECK_FALSE(b.created);
  CHECK(a.object == b.object);
  CHECK(map.size() == 1);
  CHECK(map.object(a.object).observations.size() == 2);
  check_cache_consistent(map.object(a.object), map.keyframes());
}

TEST_CASE("register: far apart clouds give two objects") {
  SemanticMap map = map_with_keyframes(1);
  map.register_candidate(cube_cloud({0, 0, 1}), "cup", 0);
  map.register_candidate(cube_cloud({5, 0, 1}), "cup", 0);
  CHECK(map.size() == 2);
}

TEST_CASE("register error paths") {
  SemanticMap map = map_with_keyframes(1);
  CHECK_THROWS_AS(map.register_candidate(cube_cloud({0, 0, 1}), "cup", 9), Error);
  CHECK_THROWS_AS(map.register_candidate(PointCloud(Frame::World), "cup", 0), Error);
  CHECK_THROWS_AS(map.add_keyframe({0, RigidPose::identity(), 0}), Error);
}

TEST_CASE("observations are stored in keyframe-local coordinates") {
  SemanticMap map;
  const RigidPose pose = RigidPose::look_at({1, 1, 1}, {0, 0, 0});
  map.add_keyframe({4, pose, 4});
  const PointCloud cup = cube_cloud({0, 0, 0});
  const auto r = map.register_candidate(cup, "cup", 4);
  const auto& obs = map.object(r.object).observations.at(0);
  CHECK(obs.local.frame == Frame::KeyframeLocal);
  CHECK((pose.apply(obs.local.points[5]) - cup.points[5]).norm() < 1e-12);
}

TEST_CASE("merge examples") {
  const MapConfig config;
  KeyframeStore kfs{{0, {0, RigidPose::identity(), 0}}};
  const auto single = [&](ObjectId id, const Vec3& p, const std::string& cls = "cup") {
    SemanticObject o;
    o.id = id;
    o.class_label = cls;
    o.observations.push_back({0, PointCloud(Frame::KeyframeLocal, {p})});
    rebuild_world_cache(o, kfs, config);
    return o;
  };
  const auto a = single(1, {0, 0, 0}), b = single(2, {1, 0, 0});
  const auto m = merge_objects(a, b, kfs, config);
  CHECK(m.id == 1);
  CHECK((m.centroid - Vec3(0.5, 0, 0)).norm() < 1e-15);
  CHECK(m.aabb.min.x() == 0.0);
  CHECK(m.aabb.max.x() == 1.0);
  CHECK(m.observations.size() == 2);

  const auto self = merge_objects(a, a, kfs, config);
  CHECK((self.centroid - a.centroid).norm() < 1e-15);
  CHECK_THROWS_AS(merge_objects(a, single(3, {0, 0, 0}, "book"), kfs, config), Error);
}

TEST_CASE("merge voxel-downsamples caches past the point cap") {
  MapConfig config;
  config.max_object_points = 100;
  KeyframeStore kfs{{0, {0, RigidPose::identity(), 0}}};
  SemanticObject a;
  a.id = 1;
  a.class_label = "cup";
  a.observations.push_back({0, cube_cloud({0, 0, 0}, 0.1, 5)});
  a.observations[0].local.frame = Frame::KeyframeLocal;
  SemanticObject b = a;
  b.id = 2;
  rebuild_world_cache(a, kfs, config);
  const auto m = merge_objects(a, b, kfs, config);
  CHECK(m.world.size() <= 125);
  CHECK(m.observations.size() == 2);
  for (const auto& p : m.world.points) CHECK(m.aabb.contains(p));
}

TEST_CASE("identity correction changes nothing") {
  SemanticMap map = map_with_keyframes(3);
  map.register_candidate(cube_cloud({0, 0, 1}), "cup", 0);
  map.register_candidate(cube_cloud({1, 0, 1}), "cup", 1);
  const auto before = map.objects();
  std::vector<std::pair<KeyframeId, RigidPose>> corr{{0, RigidPose::identity()}, {1, RigidPose::identity()}};
  const auto report = map.apply_trajectory_correction(corr);
  CHECK(report.merged.empty());
  CHECK(report.objects_before == 2);
  CHECK(report.objects_after == 2);
  for (const auto& [id, o] : map.objects()) CHECK((o.centroid - before.at(id).centroid).norm() < 1e-12);
}

TEST_CASE("correction translates a single-observation object rigidly") {
  SemanticMap map = map_with_keyframes(1);
  const auto r = map.register_candidate(cube_cloud({0, 0, 1}), "cup", 0);
  const Vec3 c0 = map.object(r.object).centroid;
  std::vector<std::pair<KeyframeId, RigidPose>> corr{{0, RigidPose::from_translation({1, 0, 0})}};
  map.apply_trajectory_correction(corr);
  CHECK((map.object(r.object).centroid - (c0 + Vec3(1, 0, 0))).norm() < 1e-12);
}

TEST_CASE("correction with an unknown keyframe changes nothing") {
  SemanticMap map = map_with_keyframes(1);
  const auto r = map.register_candidate(cube_cloud({0, 0, 1}), "cup", 0);
  std::vector<std::pair<KeyframeId, RigidPose>> corr{{0, RigidPose::from_translation({1, 0, 0})},
                                                     {42, RigidPose::identity()}};
  CHECK_THROWS_AS(map.apply_trajectory_correction(corr), Error);
  CHECK(map.keyframe(0).pose.max_abs_diff(RigidPose::identity()) == 0.0);
  CHECK((map.object(r.object).centroid - Vec3(0, 0, 1)).norm() < 1e-12);
}

TEST_CASE("correction merges drifted duplicates into the older id") {
  SemanticMap map;
  map.add_keyframe({0, RigidPose::identity(), 0});
  map.add_keyframe({1, RigidPose::from_translation({0.5, 0, 0}), 1});  // drifted estimate
  const PointCloud cup = cube_cloud({0, 0, 1});
  map.register_candidate(cup, "cup", 0);
  PointCloud seen = cup;  // seen from the drifted keyframe, lands 0.5 m off
  for (auto& p : seen.points) p += Vec3(0.5, 0, 0);
  map.register_candidate(seen, "cup", 1);
  REQUIRE(map.size() == 2);
  std::vector<std::pair<KeyframeId, RigidPose>> corr{{1, RigidPose::identity()}};
  const auto report = map.apply_trajectory_correction(corr);
  REQUIRE(report.merged.size() == 1);
  CHECK(report.merged[0] == std::pair<ObjectId, ObjectId>{1, 2});
  CHECK(map.size() == 1);
  CHECK(map.object(1).observations.size() == 2);
  CHECK((map.object(1).centroid - cup.centroid()).norm() < 1e-12);
}

TEST_CASE("merges never cross classes") {
  SemanticMap map = map_with_keyframes(2);
  map.register_candidate(cube_cloud({0, 0, 1}), "cup", 0);
  map.register_candidate(cube_cloud({0, 0, 1}), "book", 1);
  std::vector<std::pair<KeyframeId, RigidPose>> corr{{1, RigidPose::identity()}};
  CHECK(map.apply_trajectory_correction(corr).merged.empty());
  CHECK(map.size() == 2);
}

TEST_CASE("property: size law, cache consistency, fixpoint and equivariance under random operations") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 5);
  const std::vector<std::string> classes{"cup", "book"};
  const std::vector<Vec3> anchors{{0, 0, 1}, {0.6, 0, 1}, {0, 0.7, 1}};
  for (int trial = 0; trial < 15; ++trial) {
    SemanticMap map;
    KeyframeId next = 0;
    for (int step = 0; step < 25; ++step) {
      const Vec3 drift(0.15 * u(rng), 0.15 * u(rng), 0.0);
      map.add_keyframe({next, RigidPose::from_translation(drift), next});
      const int which = pick(rng);
      PointCloud c = cube_cloud(anchors[static_cast<std::size_t>(which % 3)], 0.1, 5);
      for (auto& p : c.points) p += drift;
      const std::string& cls = classes[static_cast<std::size_t>(which / 3)];
      const std::size_t before = map.size();
      const bool matched = map.associate(c, cls).has_value();
      const auto reg = map.register_candidate(c, cls, next);
      CHECK(reg.created == !matched);
      CHECK(map.size() == before + (matched ? 0 : 1));
      ++next;
    }
    for (const auto& [id, o] : map.objects()) check_cache_consistent(o, map.keyframes());

    std::vector<std::pair<KeyframeId, RigidPose>> forward, back;
    const RigidPose t = oracle::random_pose(rng, 0.5);
    for (const auto& [id, kf] : map.keyframes()) {
      forward.emplace_back(id, t * kf.pose);
      back.emplace_back(id, kf.pose);
    }
    // a rigid transform of every keyframe keeps all overlaps, so no merges happen
    std::map<ObjectId, Vec3> c0;
    for (const auto& [id, o] : map.objects()) c0[id] = o.centroid;
    const std::size_t size0 = map.size();
    const auto r1 = map.apply_trajectory_correction(forward);
    const auto r2 = map.apply_trajectory_correction(back);
    if (r1.merged.empty() && r2.merged.empty()) {
      CHECK(map.size() == size0);
      for (const auto& [id, o] : map.objects()) CHECK((o.centroid - c0.at(id)).norm() < 1e-9);
    }

    // undo the drift: duplicates collapse and no overlapping pair survives
    std::vector<std::pair<KeyframeId, RigidPose>> truth;
    for (const auto& [id, kf] : map.keyframes()) truth.emplace_back(id, RigidPose::identity());
    const auto report = map.apply_trajectory_correction(truth);
    CHECK(report.objects_before - report.objects_after == report.merged.size());
    CHECK(overlapping_pairs(map) == 0);
    CHECK(map.size() <= 6);
    for (const auto& [id, o] : map.objects()) check_cache_consistent(o, map.keyframes());
  }
}
