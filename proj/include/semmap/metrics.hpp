#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "semmap/semantic_map.hpp"
#include "semmap/simulator.hpp"

namespace semmap {

struct ObjectMatch {
  ObjectId object = 0;
  int gt_index = -1;  // -1: no ground-truth object of that class within the radius
  bool duplicate = false;
  double error = 0.0;  // centroid distance to the matched ground truth, m
};

struct TriggerRecord {
  TrackId face_track = 0;
  int person_index = -1;  // ground-truth person behind the track, -1 if unknown
  double t = 0.0;
};

struct MetricsReport {
  std::size_t gt_object_count = 0;
  std::size_t registered_count = 0;
  std::size_t matched_count = 0;
  std::size_t duplicate_count = 0;
  double precision = 1.0;
  double recall = 1.0;
  double centroid_rmse = 0.0;
  std::size_t spurious_confirmations = 0;
  std::vector<ObjectMatch> matches;
  std::vector<TriggerRecord> triggers;
  // Ground-truth attention windows, (person id, window), for comparison with the triggers.
  std::vector<std::pair<PersonId, AttentionWindow>> attention_windows;
};

/// Greedy matcher in object id order: each registered object takes the nearest
/// same-class ground-truth object within `radius`. Taking one that is already
/// claimed makes it a duplicate. Empty denominators give 1.0.
MetricsReport evaluate_map(const SemanticMap& map, const std::vector<WorldObject>& ground_truth,
                           double radius = 0.5);

}  // namespace semmap
