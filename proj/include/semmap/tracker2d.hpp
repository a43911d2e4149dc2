#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semmap/geometry.hpp"

namespace semmap {

enum class DetectionKind { Object, Person, Face };

const char* to_string(DetectionKind kind);
DetectionKind detection_kind_from_string(const std::string& s);

struct Detection2D {
  Rect bbox;
  std::string class_label;
  double score = 1.0;
  DetectionKind kind = DetectionKind::Object;
};

using TrackId = std::int64_t;
using FrameId = std::int64_t;

struct Track {
  TrackId id = 0;
  std::string class_label;
  Rect last_bbox;
  int length = 1;
  int misses = 0;
  bool confirmed = false;
};

/// Intersection over union of two rectangles, 0 when disjoint.
double iou(const Rect& a, const Rect& b);

struct TrackerConfig {
  double iou_threshold = 0.5;
  int min_length = 5;  // frames before a track is trusted
  int ttl = 3;         // consecutive misses tolerated

  void validate() const;
};

struct Confirmation {
  TrackId track_id = 0;
  Detection2D detection;
  std::size_t detection_index = 0;
};

struct TrackerStep {
  std::vector<Confirmation> confirmations;
  // Track each input detection was assigned to, index-aligned with the input.
  std::vector<TrackId> assignments;
  std::vector<TrackId> dropped;
};

/// Label-gated greedy IoU tracker.
///
/// Each step repeatedly takes the highest-IoU (track, detection) pair of equal
/// class whose IoU reaches the threshold; ties go to the lower track id, then
/// to the lower detection index. A track confirms exactly once, on the step
/// its length first reaches `min_length`.
class IouTracker {
 public:
  explicit IouTracker(TrackerConfig config = {});

  TrackerStep step(const std::vector<Detection2D>& detections, FrameId frame);

  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackerConfig& config() const { return config_; }
  std::optional<FrameId> last_frame() const { return last_frame_; }

 private:
  TrackerConfig config_;
  std::vector<Track> tracks_;  // ordered by id
  TrackId next_id_ = 1;
  std::optional<FrameId> last_frame_;
};

}  // namespace semmap
