#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "semmap/geometry.hpp"
#include "semmap/headpose.hpp"
#include "semmap/semantic_map.hpp"
#include "semmap/tracker2d.hpp"
#include "semmap/willingness.hpp"

namespace semmap {

/// Axis-aligned box in the world with a fixed set of surface samples.
struct WorldObject {
  std::string class_label;
  Vec3 centroid = Vec3::Zero();
  Vec3 extents = Vec3::Constant(0.1);  // full side lengths, m
  int samples = 1500;
};

struct AttentionWindow {
  double start = 0.0;  // s
  double end = 0.0;
};

struct ScenarioPerson {
  PersonId id = 0;
  Vec3 head_position = Vec3::Zero();  // world, between the eyes
  std::vector<AttentionWindow> attention;
  double away_yaw_deg = 50.0;

  bool attending_at(double t) const;
};

/// Scripted odometry drift. The estimate is D * T_true with D accumulated one
/// increment per frame in [start_frame, end_frame] and reset by correction events.
struct DriftModel {
  int start_frame = 0;
  int end_frame = -1;  // -1: no end
  Vec3 translation_per_frame = Vec3::Zero();
  double yaw_deg_per_frame = 0.0;
};

struct CorrectionEvent {
  int frame = 0;
  // Ground-truth correction replaces every keyframe before `frame` with its true pose.
  bool ground_truth = true;
  std::vector<std::pair<KeyframeId, RigidPose>> poses;
};

struct NoiseModel {
  double bbox_jitter_px = 0.0;
  double dropout_prob = 0.0;
  double false_positive_rate = 0.0;  // probability of one spurious box per frame
  double depth_noise_m = 0.0;
  double landmark_px = 0.0;
};

struct Scenario {
  std::uint64_t seed = 0;
  CameraIntrinsics intrinsics;
  std::vector<WorldObject> objects;
  std::vector<ScenarioPerson> persons;
  std::vector<RigidPose> trajectory;  // true camera-to-world pose per frame
  DriftModel drift;
  std::vector<CorrectionEvent> corrections;
  NoiseModel noise;
  double background_depth = 5.0;
  double max_range = 6.0;
  double fps = 10.0;
  std::vector<std::string> false_positive_classes;
  FaceModel3D face_model = FaceModel3D::generic_six_point();

  void validate() const;
  std::size_t frame_count() const { return trajectory.size(); }
};

/// Where a synthetic detection came from.
struct DetectionSource {
  enum class Kind { Object, FalsePositive, Face };
  Kind kind = Kind::Object;
  int index = -1;  // world object index or person index
};

struct SyntheticFrame {
  std::vector<Detection2D> detections;
  std::vector<DetectionSource> sources;                 // aligned with detections
  std::vector<std::optional<LandmarkSet2D>> landmarks;  // set for face detections
  DepthImage depth;
  RigidPose pose_estimate;
  RigidPose true_pose;
};

/// Surface samples of a world object; depends only on (seed, object index).
std::vector<Vec3> surface_samples(const Scenario& scenario, std::size_t object_index);

/// Estimated pose of `frame_idx` after drift and any earlier corrections.
RigidPose estimated_pose(const Scenario& scenario, std::size_t frame_idx);

/// Renders one frame. Output depends only on (scenario, frame_idx).
SyntheticFrame synthesize_frame(const Scenario& scenario, std::size_t frame_idx);

/// Ground truth head rotation (model to camera) of a person at time t.
Mat3 true_head_rotation(const ScenarioPerson& person, double t);

}  // namespace semmap
