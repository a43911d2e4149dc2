#include "semmap/pipeline.hpp"

#include <map>
#include <string>

namespace semmap {

namespace {

std::vector<std::pair<KeyframeId, RigidPose>> correction_poses(const CorrectionEvent& event, const Scenario& scenario,
                                                               const SemanticMap& map) {
  if (!event.ground_truth) return event.poses;
  std::vector<std::pair<KeyframeId, RigidPose>> poses;
  for (const auto& [id, kf] : map.keyframes()) {
    if (kf.frame < event.frame) poses.emplace_back(id, scenario.trajectory.at(static_cast<std::size_t>(kf.frame)));
  }
  return poses;
}

}  // namespace

RunResult run_scenario(const Scenario& scenario, const PipelineConfig& config) {
  scenario.validate();
  config.validate();

  RunResult result{SemanticMap(config.map), {}, {}};
  SemanticMap& map = result.map;
  IouTracker object_tracker(config.tracker);
  // Faces only need identities across frames; there is nothing to confirm.
  IouTracker face_tracker({config.tracker.iou_threshold, 1, config.tracker.ttl});
  PersonWillingnessMap willingness(config.willingness);
  std::map<TrackId, int> face_person;

  std::multimap<int, const CorrectionEvent*> corrections;
  for (const auto& c : scenario.corrections) corrections.emplace(c.frame, &c);

  for (std::size_t k = 0; k < scenario.frame_count(); ++k) {
    FrameEvent ev;
    ev.frame = static_cast<FrameId>(k);
    ev.t = static_cast<double>(k) / scenario.fps;
    try {
      const auto [first, last] = corrections.equal_range(static_cast<int>(k));
      for (auto it = first; it != last; ++it) {
        const auto poses = correction_poses(*it->second, scenario, map);
        MergeReport report = map.apply_trajectory_correction(poses);
        if (ev.correction) {
          ev.correction->merged.insert(ev.correction->merged.end(), report.merged.begin(), report.merged.end());
          ev.correction->objects_after = report.objects_after;
        } else {
          ev.correction = std::move(report);
        }
      }

      const SyntheticFrame frame = synthesize_frame(scenario, k);
      ev.detections = frame.detections.size();
      map.add_keyframe({static_cast<KeyframeId>(k), frame.pose_estimate, static_cast<FrameId>(k)});

      std::vector<Detection2D> objects, faces;
      std::vector<std::size_t> object_index, face_index;
      for (std::size_t i = 0; i < frame.detections.size(); ++i) {
        switch (frame.detections[i].kind) {
          case DetectionKind::Object:
            objects.push_back(frame.detections[i]);
            object_index.push_back(i);
            break;
          case DetectionKind::Face:
            faces.push_back(frame.detections[i]);
            face_index.push_back(i);
            break;
          case DetectionKind::Person:
            break;
        }
      }

      const TrackerStep step = object_tracker.step(objects, ev.frame);
      for (const auto& conf : step.confirmations) {
        ConfirmationEvent ce;
        ce.track = conf.track_id;
        ce.class_label = conf.detection.class_label;
        ce.source = frame.sources[object_index[conf.detection_index]];
        try {
          const PointCloud cloud = extract_object_cloud(conf.detection.bbox, frame.depth, frame.pose_estimate,
                                                        scenario.intrinsics, config.extraction);
          const auto reg = map.register_candidate(cloud, conf.detection.class_label, ev.frame);
          ce.object = reg.object;
          ce.created = reg.created;
          ce.points = cloud.size();
        } catch (const Error& e) {
          if (e.code() != ErrorCode::EmptyCloud) throw;
          ce.skipped = std::string(to_string(e.code()));
        }
        ev.confirmations.push_back(std::move(ce));
      }

      const TrackerStep face_step = face_tracker.step(faces, ev.frame);
      for (const TrackId dropped : face_step.dropped) {
        willingness.erase(dropped);
        face_person.erase(dropped);
      }
      std::vector<std::pair<PersonId, bool>> attention;
      for (std::size_t i = 0; i < faces.size(); ++i) {
        const std::size_t det = face_index[i];
        FaceEvent fe;
        fe.track = face_step.assignments[i];
        fe.person_index = frame.sources[det].index;
        face_person[fe.track] = fe.person_index;
        try {
          fe.pose = lm_solve_pose(*frame.landmarks[det], scenario.face_model, scenario.intrinsics, std::nullopt,
                                  config.lm);
          fe.solved = true;
          fe.attending = is_attending(fe.pose, config.attention_cone_deg);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NoConvergence && e.code() != ErrorCode::DegenerateConfiguration &&
              e.code() != ErrorCode::PointBehindCamera) {
            throw;
          }
        }
        attention.emplace_back(fe.track, fe.attending);
        ev.faces.push_back(fe);
      }
      ev.triggers = willingness.step_frame(attention, ev.t);
      for (auto& fe : ev.faces) fe.willingness = willingness.states().at(fe.track).value;
      for (const TrackId id : ev.triggers) {
        result.metrics.triggers.push_back({id, face_person.count(id) ? face_person.at(id) : -1, ev.t});
      }
      ev.registry_size = map.size();
    } catch (const Error& e) {
      throw Error(e.code(), "frame " + std::to_string(k) + ": " + e.detail());
    }
    result.events.push_back(std::move(ev));
  }

  auto triggers = std::move(result.metrics.triggers);
  result.metrics = evaluate_map(map, scenario.objects);
  result.metrics.triggers = std::move(triggers);
  for (const auto& ev : result.events) {
    for (const auto& ce : ev.confirmations) {
      if (ce.source.kind == DetectionSource::Kind::FalsePositive) ++result.metrics.spurious_confirmations;
    }
  }
  for (const auto& person : scenario.persons) {
    for (const auto& w : person.attention) result.metrics.attention_windows.emplace_back(person.id, w);
  }
  return result;
}

}  // namespace semmap
