#include "semmap/semantic_map.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <tuple>

#include "semmap/spatial_hash.hpp"

namespace semmap {

void MapConfig::validate() const {
  if (!(assoc_threshold > 0.0)) throw Error(ErrorCode::ConfigError, "assoc_threshold must be positive");
  if (!(merge_overlap_ratio > 0.0 && merge_overlap_ratio <= 1.0)) {
    throw Error(ErrorCode::ConfigError, "merge_overlap_ratio must be in (0, 1]");
  }
  if (!(overlap_radius > 0.0)) throw Error(ErrorCode::ConfigError, "overlap_radius must be positive");
  if (!(voxel_leaf > 0.0)) throw Error(ErrorCode::ConfigError, "voxel_leaf must be positive");
  if (max_object_points == 0) throw Error(ErrorCode::ConfigError, "max_object_points must be positive");
}

namespace {

double mean_nearest(const PointCloud& from, const SpatialHash& to) {
  double sum = 0.0;
  for (const auto& p : from.points) sum += to.nearest(p).distance;
  return sum / static_cast<double>(from.size());
}

}  // namespace

double chamfer_distance(const PointCloud& a, const PointCloud& b, double cell) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyCloud, "chamfer distance needs two non-empty clouds");
  require_same_frame(a, b);
  const SpatialHash index_a(a.points, cell);
  const SpatialHash index_b(b.points, cell);
  return 0.5 * (mean_nearest(a, index_b) + mean_nearest(b, index_a));
}

double overlap_ratio(const PointCloud& a, const PointCloud& b, double radius) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyCloud, "overlap ratio needs two non-empty clouds");
  require_same_frame(a, b);
  const PointCloud& small = b.size() < a.size() ? b : a;
  const PointCloud& large = b.size() < a.size() ? a : b;
  const SpatialHash index(large.points, radius);
  std::size_t inside = 0;
  for (const auto& p : small.points) {
    if (index.any_within(p, radius)) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(small.size());
}

void rebuild_world_cache(SemanticObject& object, const KeyframeStore& keyframes, const MapConfig& config) {
  if (object.observations.empty()) {
    throw Error(ErrorCode::EmptyCloud, "object " + std::to_string(object.id) + " has no observations");
  }
  PointCloud world(Frame::World);
  for (const auto& obs : object.observations) {
    const auto it = keyframes.find(obs.keyframe);
    if (it == keyframes.end()) {
      throw Error(ErrorCode::UnknownKeyframe, "keyframe " + std::to_string(obs.keyframe));
    }
    const RigidPose& pose = it->second.pose;
    for (const auto& p : obs.local.points) world.points.push_back(pose.apply(p));
  }
  if (world.size() > config.max_object_points) {
    world = voxel_downsample(world, config.voxel_leaf);
  }
  object.world = std::move(world);
  object.centroid = object.world.centroid();
  object.aabb = bounding_box(object.world);
}

SemanticObject merge_objects(const SemanticObject& survivor, const SemanticObject& absorbed,
                             const KeyframeStore& keyframes, const MapConfig& config) {
  if (survivor.class_label != absorbed.class_label) {
    throw Error(ErrorCode::ClassMismatch, "cannot merge '" + survivor.class_label + "' with '" +
                                              absorbed.class_label + "'");
  }
  SemanticObject merged;
  merged.id = survivor.id;
  merged.class_label = survivor.class_label;
  merged.observations = survivor.observations;
  merged.observations.insert(merged.observations.end(), absorbed.observations.begin(), absorbed.observations.end());
  rebuild_world_cache(merged, keyframes, config);
  return merged;
}

SemanticMap::SemanticMap(MapConfig config) : config_(config) { config_.validate(); }

void SemanticMap::add_keyframe(const Keyframe& keyframe) {
  if (!keyframes_.emplace(keyframe.id, keyframe).second) {
    throw Error(ErrorCode::DuplicateKeyframe, "keyframe " + std::to_string(keyframe.id));
  }
}

const Keyframe& SemanticMap::keyframe(KeyframeId id) const {
  const auto it = keyframes_.find(id);
  if (it == keyframes_.end()) throw Error(ErrorCode::UnknownKeyframe, "keyframe " + std::to_string(id));
  return it->second;
}

const SemanticObject& SemanticMap::object(ObjectId id) const {
  const auto it = objects_.find(id);
  if (it == objects_.end()) throw Error(ErrorCode::InvalidArgument, "unknown object " + std::to_string(id));
  return it->second;
}

std::optional<ObjectId> SemanticMap::associate(const PointCloud& candidate, std::string_view class_label) const {
  if (candidate.empty()) throw Error(ErrorCode::EmptyCloud, "empty candidate");
  std::optional<ObjectId> best;
  double best_distance = std::numeric_limits<double>::infinity();
  for (const auto& [id, obj] : objects_) {
    if (obj.class_label != class_label) continue;
    const double d = chamfer_distance(candidate, obj.world, config_.overlap_radius);
    if (d < best_distance) {
      best_distance = d;
      best = id;
    }
  }
  if (best && best_distance <= config_.assoc_threshold) return best;
  return std::nullopt;
}

SemanticMap::Registration SemanticMap::register_candidate(const PointCloud& candidate, std::string_view class_label,
                                                          KeyframeId keyframe_id) {
  if (candidate.frame != Frame::World) {
    throw Error(ErrorCode::FrameMismatch, "candidates must be world-frame clouds");
  }
  const Keyframe& kf = keyframe(keyframe_id);
  const auto match = associate(candidate, class_label);

  Observation obs{keyframe_id, transform(candidate, kf.pose.inverse(), Frame::KeyframeLocal)};
  if (match) {
    SemanticObject& obj = objects_.at(*match);
    obj.observations.push_back(std::move(obs));
    rebuild_world_cache(obj, keyframes_, config_);
    return {*match, false};
  }
  SemanticObject obj;
  obj.id = next_id_++;
  obj.class_label = std::string(class_label);
  obj.observations.push_back(std::move(obs));
  rebuild_world_cache(obj, keyframes_, config_);
  const ObjectId id = obj.id;
  objects_.emplace(id, std::move(obj));
  return {id, true};
}

MergeReport SemanticMap::apply_trajectory_correction(
    std::span<const std::pair<KeyframeId, RigidPose>> corrected) {
  for (const auto& [id, pose] : corrected) {
    if (!keyframes_.contains(id)) throw Error(ErrorCode::UnknownKeyframe, "keyframe " + std::to_string(id));
  }
  for (const auto& [id, pose] : corrected) keyframes_.at(id).pose = pose;
  for (auto& [id, obj] : objects_) rebuild_world_cache(obj, keyframes_, config_);
  return merge_to_fixpoint();
}

MergeReport SemanticMap::merge_to_fixpoint() {
  MergeReport report;
  report.objects_before = objects_.size();
  for (;;) {
    // Highest overlap first; ties resolved by the (older, newer) id pair.
    std::optional<std::tuple<double, ObjectId, ObjectId>> best;
    for (auto a = objects_.begin(); a != objects_.end(); ++a) {
      for (auto b = std::next(a); b != objects_.end(); ++b) {
        if (a->second.class_label != b->second.class_label) continue;
        const double ratio = overlap_ratio(a->second.world, b->second.world, config_.overlap_radius);
        if (ratio < config_.merge_overlap_ratio) continue;
        if (!best || ratio > std::get<0>(*best)) best = std::make_tuple(ratio, a->first, b->first);
      }
    }
    if (!best) break;
    const auto [ratio, survivor, absorbed] = *best;
    objects_.at(survivor) = merge_objects(objects_.at(survivor), objects_.at(absorbed), keyframes_, config_);
    objects_.erase(absorbed);
    report.merged.emplace_back(survivor, absorbed);
  }
  report.objects_after = objects_.size();
  return report;
}

}  // namespace semmap
