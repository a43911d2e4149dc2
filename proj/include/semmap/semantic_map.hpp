#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semmap/geometry.hpp"
#include "semmap/tracker2d.hpp"

namespace semmap {

using ObjectId = std::int64_t;
using KeyframeId = std::int64_t;

struct Keyframe {
  KeyframeId id = 0;
  RigidPose pose;
  FrameId frame = 0;
};

using KeyframeStore = std::map<KeyframeId, Keyframe>;

struct Observation {
  KeyframeId keyframe = 0;
  PointCloud local{Frame::KeyframeLocal};
};

/// A class-labeled map object. Geometry lives in keyframe-local observations;
/// the world cloud, centroid and box are caches derived from the current keyframe poses.
struct SemanticObject {
  ObjectId id = 0;
  std::string class_label;
  std::vector<Observation> observations;
  PointCloud world{Frame::World};
  Vec3 centroid = Vec3::Zero();
  Aabb aabb;
};

struct MergeReport {
  std::vector<std::pair<ObjectId, ObjectId>> merged;  // (survivor, absorbed)
  std::size_t objects_before = 0;
  std::size_t objects_after = 0;
};

struct MapConfig {
  double assoc_threshold = 0.3;      // m, chamfer gate for recognition
  double merge_overlap_ratio = 0.5;  // fraction of the smaller cloud
  double overlap_radius = 0.05;      // m, also the hash cell size
  double voxel_leaf = 0.01;          // m
  std::size_t max_object_points = 50000;

  void validate() const;
};

/// Symmetric mean nearest-neighbor distance:
/// 0.5 * (mean_a d(a, B) + mean_b d(b, A)).
double chamfer_distance(const PointCloud& a, const PointCloud& b, double cell = 0.05);

/// Fraction of the smaller cloud's points lying within `radius` of the larger cloud.
double overlap_ratio(const PointCloud& a, const PointCloud& b, double radius);

/// Recomputes world cloud, centroid and box of `object` from its observations.
void rebuild_world_cache(SemanticObject& object, const KeyframeStore& keyframes, const MapConfig& config);

/// Concatenates observations of two same-class objects. Throws ClassMismatch.
SemanticObject merge_objects(const SemanticObject& survivor, const SemanticObject& absorbed,
                             const KeyframeStore& keyframes, const MapConfig& config);

/// Registry of semantic objects and the keyframes anchoring them.
class SemanticMap {
 public:
  explicit SemanticMap(MapConfig config = {});

  void add_keyframe(const Keyframe& keyframe);
  const Keyframe& keyframe(KeyframeId id) const;
  const KeyframeStore& keyframes() const { return keyframes_; }

  /// Same-class object with the smallest chamfer distance, if within the gate.
  std::optional<ObjectId> associate(const PointCloud& candidate, std::string_view class_label) const;

  struct Registration {
    ObjectId object = 0;
    bool created = false;
  };

  /// Adds a world-frame candidate either as a new observation of a recognized
  /// object or as a new object.
  Registration register_candidate(const PointCloud& candidate, std::string_view class_label,
                                  KeyframeId keyframe);

  /// Replaces keyframe poses, rebuilds every object from its observations and
  /// merges same-class objects that now overlap until none do.
  MergeReport apply_trajectory_correction(std::span<const std::pair<KeyframeId, RigidPose>> corrected);

  const std::map<ObjectId, SemanticObject>& objects() const { return objects_; }
  const SemanticObject& object(ObjectId id) const;
  std::size_t size() const { return objects_.size(); }
  const MapConfig& config() const { return config_; }

 private:
  MergeReport merge_to_fixpoint();

  MapConfig config_;
  KeyframeStore keyframes_;
  std::map<ObjectId, SemanticObject> objects_;
  ObjectId next_id_ = 1;
};

}  // namespace semmap
