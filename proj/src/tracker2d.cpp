#include "semmap/tracker2d.hpp"

#include <algorithm>
#include <string>
#include <tuple>

namespace semmap {

const char* to_string(DetectionKind kind) {
  switch (kind) {
    case DetectionKind::Object: return "object";
    case DetectionKind::Person: return "person";
    case DetectionKind::Face: return "face";
  }
  return "object";
}

DetectionKind detection_kind_from_string(const std::string& s) {
  if (s == "object") return DetectionKind::Object;
  if (s == "person") return DetectionKind::Person;
  if (s == "face") return DetectionKind::Face;
  throw Error(ErrorCode::SchemaError, "unknown detection kind '" + s + "'");
}

double iou(const Rect& a, const Rect& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

void TrackerConfig::validate() const {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw Error(ErrorCode::ConfigError, "iou_threshold must be in (0, 1]");
  }
  if (min_length < 1) throw Error(ErrorCode::ConfigError, "min_track_length must be >= 1");
  if (ttl < 0) throw Error(ErrorCode::ConfigError, "track_ttl must be >= 0");
}

IouTracker::IouTracker(TrackerConfig config) : config_(config) { config_.validate(); }

TrackerStep IouTracker::step(const std::vector<Detection2D>& detections, FrameId frame) {
  if (last_frame_ && frame <= *last_frame_) {
    throw Error(ErrorCode::NonMonotonicFrame,
                "frame " + std::to_string(frame) + " after " + std::to_string(*last_frame_));
  }
  for (const auto& d : detections) {
    if (!d.bbox.valid() || !(d.score >= 0.0 && d.score <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "malformed detection of class '" + d.class_label + "'");
    }
  }
  last_frame_ = frame;

  struct Candidate {
    double iou;
    std::size_t track;
    std::size_t det;
  };
  std::vector<Candidate> candidates;
  for (std::size_t t = 0; t < tracks_.size(); ++t) {
    for (std::size_t d = 0; d < detections.size(); ++d) {
      if (tracks_[t].class_label != detections[d].class_label) continue;
      const double o = iou(tracks_[t].last_bbox, detections[d].bbox);
      if (o >= config_.iou_threshold) candidates.push_back({o, t, d});
    }
  }
  // tracks_ is ordered by id, so the track index breaks ties by id.
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(b.iou, a.track, a.det) < std::tie(a.iou, b.track, b.det);
  });

  TrackerStep out;
  out.assignments.assign(detections.size(), 0);
  std::vector<bool> track_used(tracks_.size(), false);
  std::vector<bool> det_used(detections.size(), false);

  for (const auto& c : candidates) {
    if (track_used[c.track] || det_used[c.det]) continue;
    track_used[c.track] = true;
    det_used[c.det] = true;
    Track& tr = tracks_[c.track];
    tr.last_bbox = detections[c.det].bbox;
    ++tr.length;
    tr.misses = 0;
    out.assignments[c.det] = tr.id;
    if (!tr.confirmed && tr.length >= config_.min_length) {
      tr.confirmed = true;
      out.confirmations.push_back({tr.id, detections[c.det], c.det});
    }
  }

  std::vector<Track> survivors;
  survivors.reserve(tracks_.size() + detections.size());
  for (std::size_t t = 0; t < tracks_.size(); ++t) {
    Track& tr = tracks_[t];
    if (!track_used[t] && ++tr.misses > config_.ttl) {
      out.dropped.push_back(tr.id);
      continue;
    }
    survivors.push_back(std::move(tr));
  }

  for (std::size_t d = 0; d < detections.size(); ++d) {
    if (det_used[d]) continue;
    Track tr;
    tr.id = next_id_++;
    tr.class_label = detections[d].class_label;
    tr.last_bbox = detections[d].bbox;
    out.assignments[d] = tr.id;
    if (config_.min_length <= 1) {
      tr.confirmed = true;
      out.confirmations.push_back({tr.id, detections[d], d});
    }
    survivors.push_back(std::move(tr));
  }
  tracks_ = std::move(survivors);
  // Confirmations in ascending detection order keep downstream registration order stable.
  std::sort(out.confirmations.begin(), out.confirmations.end(),
            [](const Confirmation& a, const Confirmation& b) { return a.detection_index < b.detection_index; });
  return out;
}

}  // namespace semmap
