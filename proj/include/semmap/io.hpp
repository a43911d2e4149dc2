#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "semmap/config.hpp"
#include "semmap/headpose.hpp"
#include "semmap/metrics.hpp"
#include "semmap/pipeline.hpp"
#include "semmap/simulator.hpp"
#include "semmap/tracker2d.hpp"

namespace semmap::io {

using nlohmann::json;

/// Reads a whole file; throws IoError.
std::string read_text(const std::filesystem::path& path);

// Strict parsers: unknown keys and wrong types are rejected.
PipelineConfig pipeline_config_from_json(const json& j);  // ConfigError
json to_json(const PipelineConfig& config);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

Scenario scenario_from_json(const json& j);  // SchemaError
Scenario load_scenario(const std::filesystem::path& path);

CameraIntrinsics intrinsics_from_json(const json& j);
FaceModel3D face_model_from_json(const json& j);
FaceModel3D load_face_model(const std::filesystem::path& path);  // SchemaError
json to_json(const FaceModel3D& model);

RigidPose pose_from_json(const json& j);
json to_json(const RigidPose& pose);

/// {frame, detections:[{kind,class,score,bbox:[x0,y0,x1,y1]}]}
struct DetectionFrame {
  FrameId frame = 0;
  std::vector<Detection2D> detections;
};
DetectionFrame detection_frame_from_json(const json& j);
json to_json(const DetectionFrame& frame);

/// {frame, face_id, landmarks:{name:[u,v],...}}
LandmarkSet2D landmarks_from_json(const json& j);
json to_json(const LandmarkSet2D& landmarks);

/// {t, persons:[{id, attending}]}
struct TimelineStep {
  double t = 0.0;
  std::vector<std::pair<PersonId, bool>> persons;
};
TimelineStep timeline_step_from_json(const json& j);

json map_to_json(const SemanticMap& map);
json to_json(const MetricsReport& metrics);
json to_json(const FrameEvent& event);

}  // namespace semmap::io
