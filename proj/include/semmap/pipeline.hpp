#pragma once

#include <optional>
#include <string>
#include <vector>

#include "semmap/config.hpp"
#include "semmap/metrics.hpp"
#include "semmap/semantic_map.hpp"
#include "semmap/simulator.hpp"

namespace semmap {

struct ConfirmationEvent {
  TrackId track = 0;
  std::string class_label;
  DetectionSource source;
  std::optional<ObjectId> object;  // empty when the cloud could not be cut
  bool created = false;
  std::size_t points = 0;
  std::string skipped;  // reason when no registration happened
};

struct FaceEvent {
  TrackId track = 0;
  int person_index = -1;
  bool solved = false;
  HeadPose pose;
  bool attending = false;
  double willingness = 0.0;
};

struct FrameEvent {
  FrameId frame = 0;
  double t = 0.0;
  std::size_t detections = 0;
  std::optional<MergeReport> correction;
  std::vector<ConfirmationEvent> confirmations;
  std::size_t registry_size = 0;
  std::vector<FaceEvent> faces;
  std::vector<TrackId> triggers;
};

struct RunResult {
  SemanticMap map;
  MetricsReport metrics;
  std::vector<FrameEvent> events;
};

/// Streams every frame of the scenario through tracking, cuboid extraction,
/// registration, corrections, head pose and willingness.
RunResult run_scenario(const Scenario& scenario, const PipelineConfig& config);

}  // namespace semmap
