#include "semmap/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string_view>

namespace semmap::io {

namespace {

// Converts any nlohmann parse/type failure into our error code.
template <typename F>
auto guarded(ErrorCode code, const std::string& context, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error&) {
    throw;
  } catch (const json::exception& e) {
    throw Error(code, context + ": " + e.what());
  }
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, ErrorCode code,
                const std::string& context) {
  if (!j.is_object()) throw Error(code, context + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(code, "unknown key '" + key + "' in " + context);
    }
  }
}

double number(const json& j, const char* key, ErrorCode code, const std::string& context) {
  const json& v = j.at(key);
  if (!v.is_number()) throw Error(code, context + "." + key + " must be a number");
  return v.get<double>();
}

std::int64_t integer(const json& j, const char* key, ErrorCode code, const std::string& context) {
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw Error(code, context + "." + key + " must be an integer");
  return v.get<std::int64_t>();
}

Vec3 vec3(const json& j, ErrorCode code, const std::string& context) {
  if (!j.is_array() || j.size() != 3 || !std::all_of(j.begin(), j.end(), [](const json& x) { return x.is_number(); })) {
    throw Error(code, context + " must be an array of 3 numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

RigidPose pose_impl(const json& j, ErrorCode code) {
  check_keys(j, {"rotation", "translation"}, code, "pose");
  const json& r = j.at("rotation");
  if (!r.is_array() || r.size() != 3) throw Error(code, "pose.rotation must be a 3x3 array");
  Mat3 m;
  for (int i = 0; i < 3; ++i) m.row(i) = vec3(r[static_cast<std::size_t>(i)], code, "pose.rotation row").transpose();
  try {
    return {m, vec3(j.at("translation"), code, "pose.translation")};
  } catch (const Error& e) {
    if (e.code() == code) throw;
    throw Error(code, e.detail());
  }
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Pipeline configuration

PipelineConfig pipeline_config_from_json(const json& j) {
  constexpr ErrorCode C = ErrorCode::ConfigError;
  return guarded(C, "config", [&] {
    check_keys(j,
               {"iou_threshold", "min_track_length", "track_ttl", "pixel_stride", "assoc_threshold",
                "merge_overlap_ratio", "overlap_radius", "voxel_leaf", "max_object_points", "attention_cone_deg",
                "rate_up", "rate_down", "reset_level", "lm_max_iterations", "lm_initial_damping",
                "lm_step_tolerance", "lm_cost_tolerance", "lm_accept_rms"},
               C, "config");
    PipelineConfig c;
    const auto num = [&](const char* key, double& field) {
      if (j.contains(key)) field = number(j, key, C, "config");
    };
    const auto count = [&](const char* key, auto& field) {
      if (!j.contains(key)) return;
      const std::int64_t v = integer(j, key, C, "config");
      if (v < 0) throw Error(C, std::string("config.") + key + " must be non-negative");
      field = static_cast<std::remove_reference_t<decltype(field)>>(v);
    };
    num("iou_threshold", c.tracker.iou_threshold);
    count("min_track_length", c.tracker.min_length);
    count("track_ttl", c.tracker.ttl);
    count("pixel_stride", c.extraction.stride);
    num("assoc_threshold", c.map.assoc_threshold);
    num("merge_overlap_ratio", c.map.merge_overlap_ratio);
    num("overlap_radius", c.map.overlap_radius);
    num("voxel_leaf", c.map.voxel_leaf);
    count("max_object_points", c.map.max_object_points);
    num("attention_cone_deg", c.attention_cone_deg);
    num("rate_up", c.willingness.rate_up);
    num("rate_down", c.willingness.rate_down);
    num("reset_level", c.willingness.reset_level);
    count("lm_max_iterations", c.lm.max_iterations);
    num("lm_initial_damping", c.lm.initial_damping);
    num("lm_step_tolerance", c.lm.step_tolerance);
    num("lm_cost_tolerance", c.lm.cost_tolerance);
    num("lm_accept_rms", c.lm.accept_rms);
    c.validate();
    return c;
  });
}

json to_json(const PipelineConfig& c) {
  return {
      {"iou_threshold", c.tracker.iou_threshold},
      {"min_track_length", c.tracker.min_length},
      {"track_ttl", c.tracker.ttl},
      {"pixel_stride", c.extraction.stride},
      {"assoc_threshold", c.map.assoc_threshold},
      {"merge_overlap_ratio", c.map.merge_overlap_ratio},
      {"overlap_radius", c.map.overlap_radius},
      {"voxel_leaf", c.map.voxel_leaf},
      {"max_object_points", c.map.max_object_points},
      {"attention_cone_deg", c.attention_cone_deg},
      {"rate_up", c.willingness.rate_up},
      {"rate_down", c.willingness.rate_down},
      {"reset_level", c.willingness.reset_level},
      {"lm_max_iterations", c.lm.max_iterations},
      {"lm_initial_damping", c.lm.initial_damping},
      {"lm_step_tolerance", c.lm.step_tolerance},
      {"lm_cost_tolerance", c.lm.cost_tolerance},
      {"lm_accept_rms", c.lm.accept_rms},
  };
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  const json j = guarded(ErrorCode::ConfigError, path.string(), [&] { return json::parse(text); });
  return pipeline_config_from_json(j);
}

// ---------------------------------------------------------------------------
// Small shared types

CameraIntrinsics intrinsics_from_json(const json& j) {
  constexpr ErrorCode S = ErrorCode::SchemaError;
  return guarded(S, "intrinsics", [&] {
    check_keys(j, {"fx", "fy", "cx", "cy", "width", "height"}, S, "intrinsics");
    CameraIntrinsics k;
    k.fx = number(j, "fx", S, "intrinsics");
    k.fy = number(j, "fy", S, "intrinsics");
    k.cx = number(j, "cx", S, "intrinsics");
    k.cy = number(j, "cy", S, "intrinsics");
    k.width = static_cast<int>(integer(j, "width", S, "intrinsics"));
    k.height = static_cast<int>(integer(j, "height", S, "intrinsics"));
    try {
      k.validate();
    } catch (const Error& e) {
      throw Error(S, "intrinsics: " + e.detail());
    }
    return k;
  });
}

FaceModel3D face_model_from_json(const json& j) {
  constexpr ErrorCode S = ErrorCode::SchemaError;
  return guarded(S, "face model", [&] {
    check_keys(j, {"units", "landmarks"}, S, "face model");
    if (j.contains("units") && j.at("units") != "m") throw Error(S, "face model units must be \"m\"");
    FaceModel3D m;
    for (const auto& lm : j.at("landmarks")) {
      check_keys(lm, {"name", "xyz"}, S, "face model landmark");
      m.names.push_back(lm.at("name").get<std::string>());
      m.points.push_back(vec3(lm.at("xyz"), S, "landmark xyz"));
    }
    m.validate();
    return m;
  });
}

FaceModel3D load_face_model(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  const json j = guarded(ErrorCode::SchemaError, path.string(), [&] { return json::parse(text); });
  return face_model_from_json(j);
}

json to_json(const FaceModel3D& model) {
  json lms = json::array();
  for (std::size_t i = 0; i < model.names.size(); ++i) {
    lms.push_back({{"name", model.names[i]}, {"xyz", vec_json(model.points[i])}});
  }
  return {{"units", "m"}, {"landmarks", lms}};
}

RigidPose pose_from_json(const json& j) {
  return guarded(ErrorCode::SchemaError, "pose", [&] { return pose_impl(j, ErrorCode::SchemaError); });
}

json to_json(const RigidPose& pose) {
  json rows = json::array();
  for (int i = 0; i < 3; ++i) rows.push_back(vec_json(pose.rotation().row(i).transpose()));
  return {{"rotation", rows}, {"translation", vec_json(pose.translation())}};
}

// ---------------------------------------------------------------------------
// Scenario

namespace {

std::vector<RigidPose> trajectory_from_json(const json& j) {
  constexpr ErrorCode S = ErrorCode::SchemaError;
  const std::string type = j.at("type").get<std::string>();
  std::vector<RigidPose> poses;
  if (type == "poses") {
    check_keys(j, {"type", "poses"}, S, "trajectory");
    for (const auto& p : j.at("poses")) poses.push_back(pose_impl(p, S));
    return poses;
  }
  const std::int64_t frames = integer(j, "frames", S, "trajectory");
  if (frames < 1) throw Error(S, "trajectory.frames must be >= 1");
  if (type == "orbit") {
    check_keys(j, {"type", "frames", "center", "radius", "height", "start_deg", "arc_deg"}, S, "trajectory");
    const Vec3 center = vec3(j.at("center"), S, "trajectory.center");
    const double radius = number(j, "radius", S, "trajectory");
    const double height = number(j, "height", S, "trajectory");
    const double start = j.contains("start_deg") ? number(j, "start_deg", S, "trajectory") : 0.0;
    const double arc = j.contains("arc_deg") ? number(j, "arc_deg", S, "trajectory") : 360.0;
    for (std::int64_t f = 0; f < frames; ++f) {
      const double a = (start + arc * static_cast<double>(f) / static_cast<double>(frames)) * std::numbers::pi / 180.0;
      const Vec3 position(center.x() + radius * std::cos(a), center.y() + radius * std::sin(a), height);
      poses.push_back(RigidPose::look_at(position, center));
    }
    return poses;
  }
  if (type == "waypoints") {
    check_keys(j, {"type", "frames", "waypoints"}, S, "trajectory");
    struct Waypoint {
      double frame;
      Vec3 position, target;
    };
    std::vector<Waypoint> wps;
    for (const auto& w : j.at("waypoints")) {
      check_keys(w, {"frame", "position", "target"}, S, "waypoint");
      wps.push_back({static_cast<double>(integer(w, "frame", S, "waypoint")),
                     vec3(w.at("position"), S, "waypoint.position"), vec3(w.at("target"), S, "waypoint.target")});
    }
    if (wps.empty()) throw Error(S, "trajectory.waypoints must not be empty");
    for (std::size_t i = 1; i < wps.size(); ++i) {
      if (wps[i].frame <= wps[i - 1].frame) throw Error(S, "waypoint frames must increase");
    }
    for (std::int64_t f = 0; f < frames; ++f) {
      const double x = static_cast<double>(f);
      std::size_t i = 0;
      while (i + 1 < wps.size() && wps[i + 1].frame <= x) ++i;
      Vec3 position = wps[i].position, target = wps[i].target;
      if (i + 1 < wps.size() && x > wps[i].frame) {
        const double s = (x - wps[i].frame) / (wps[i + 1].frame - wps[i].frame);
        position += s * (wps[i + 1].position - wps[i].position);
        target += s * (wps[i + 1].target - wps[i].target);
      }
      poses.push_back(RigidPose::look_at(position, target));
    }
    return poses;
  }
  throw Error(S, "unknown trajectory type '" + type + "'");
}

}  // namespace

Scenario scenario_from_json(const json& j) {
  constexpr ErrorCode S = ErrorCode::SchemaError;
  return guarded(S, "scenario", [&] {
    check_keys(j,
               {"seed", "intrinsics", "objects", "persons", "trajectory", "drift", "corrections", "noise",
                "background_depth", "max_range", "fps", "false_positive_classes", "face_model"},
               S, "scenario");
    Scenario sc;
    if (j.contains("seed")) {
      if (!j.at("seed").is_number_unsigned()) throw Error(S, "seed must be a non-negative integer");
      sc.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("intrinsics")) sc.intrinsics = intrinsics_from_json(j.at("intrinsics"));
    if (j.contains("background_depth")) sc.background_depth = number(j, "background_depth", S, "scenario");
    if (j.contains("max_range")) sc.max_range = number(j, "max_range", S, "scenario");
    if (j.contains("fps")) sc.fps = number(j, "fps", S, "scenario");

    for (const auto& o : j.value("objects", json::array())) {
      check_keys(o, {"class", "centroid", "extents", "samples"}, S, "object");
      WorldObject w;
      w.class_label = o.at("class").get<std::string>();
      w.centroid = vec3(o.at("centroid"), S, "object.centroid");
      if (o.contains("extents")) w.extents = vec3(o.at("extents"), S, "object.extents");
      if (o.contains("samples")) w.samples = static_cast<int>(integer(o, "samples", S, "object"));
      sc.objects.push_back(std::move(w));
    }
    for (const auto& p : j.value("persons", json::array())) {
      check_keys(p, {"id", "head_position", "attention", "away_yaw_deg"}, S, "person");
      ScenarioPerson person;
      person.id = integer(p, "id", S, "person");
      person.head_position = vec3(p.at("head_position"), S, "person.head_position");
      for (const auto& w : p.value("attention", json::array())) {
        if (!w.is_array() || w.size() != 2) throw Error(S, "attention windows are [start, end] pairs");
        person.attention.push_back({w[0].get<double>(), w[1].get<double>()});
      }
      if (p.contains("away_yaw_deg")) person.away_yaw_deg = number(p, "away_yaw_deg", S, "person");
      sc.persons.push_back(std::move(person));
    }
    sc.trajectory = trajectory_from_json(j.at("trajectory"));

    if (j.contains("drift")) {
      const json& d = j.at("drift");
      check_keys(d, {"start_frame", "end_frame", "translation_per_frame", "yaw_deg_per_frame"}, S, "drift");
      if (d.contains("start_frame")) sc.drift.start_frame = static_cast<int>(integer(d, "start_frame", S, "drift"));
      if (d.contains("end_frame")) sc.drift.end_frame = static_cast<int>(integer(d, "end_frame", S, "drift"));
      if (d.contains("translation_per_frame")) {
        sc.drift.translation_per_frame = vec3(d.at("translation_per_frame"), S, "drift.translation_per_frame");
      }
      if (d.contains("yaw_deg_per_frame")) sc.drift.yaw_deg_per_frame = number(d, "yaw_deg_per_frame", S, "drift");
    }
    for (const auto& c : j.value("corrections", json::array())) {
      check_keys(c, {"frame", "ground_truth", "poses"}, S, "correction");
      CorrectionEvent ev;
      ev.frame = static_cast<int>(integer(c, "frame", S, "correction"));
      ev.ground_truth = c.value("ground_truth", !c.contains("poses"));
      for (const auto& p : c.value("poses", json::array())) {
        check_keys(p, {"keyframe", "rotation", "translation"}, S, "correction pose");
        json pose = {{"rotation", p.at("rotation")}, {"translation", p.at("translation")}};
        ev.poses.emplace_back(integer(p, "keyframe", S, "correction pose"), pose_impl(pose, S));
      }
      sc.corrections.push_back(std::move(ev));
    }
    if (j.contains("noise")) {
      const json& n = j.at("noise");
      check_keys(n, {"bbox_jitter_px", "dropout_prob", "false_positive_rate", "depth_noise_m", "landmark_px"}, S,
                 "noise");
      const auto opt = [&](const char* key, double& field) {
        if (n.contains(key)) field = number(n, key, S, "noise");
      };
      opt("bbox_jitter_px", sc.noise.bbox_jitter_px);
      opt("dropout_prob", sc.noise.dropout_prob);
      opt("false_positive_rate", sc.noise.false_positive_rate);
      opt("depth_noise_m", sc.noise.depth_noise_m);
      opt("landmark_px", sc.noise.landmark_px);
    }
    if (j.contains("false_positive_classes")) {
      sc.false_positive_classes = j.at("false_positive_classes").get<std::vector<std::string>>();
    }
    if (j.contains("face_model")) sc.face_model = face_model_from_json(j.at("face_model"));
    sc.validate();
    return sc;
  });
}

Scenario load_scenario(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  const json j = guarded(ErrorCode::SchemaError, path.string(), [&] { return json::parse(text); });
  return scenario_from_json(j);
}

// ---------------------------------------------------------------------------
// Line formats

DetectionFrame detection_frame_from_json(const json& j) {
  constexpr ErrorCode S = ErrorCode::SchemaError;
  return guarded(S, "detection frame", [&] {
    check_keys(j, {"frame", "detections"}, S, "detection frame");
    DetectionFrame f;
    f.frame = integer(j, "frame", S, "detection frame");
    for (const auto& d : j.at("detections")) {
      check_keys(d, {"kind", "class", "score", "bbox"}, S, "detection");
      Detection2D det;
      det.kind = detection_kind_from_string(d.value("kind", std::string("object")));
      det.class_label = d.at("class").get<std::string>();
      det.score = d.value("score", 1.0);
      const auto box = d.at("bbox").get<std::vector<double>>();
      if (box.size() != 4) throw Error(S, "bbox must be [x0, y0, x1, y1]");
      det.bbox = {box[0], box[1], box[2], box[3]};
      if (!det.bbox.valid() || !(det.score >= 0.0 && det.score <= 1.0)) {
        throw Error(S, "invalid detection in frame " + std::to_string(f.frame));
      }
      f.detections.push_back(std::move(det));
    }
    return f;
  });
}

json to_json(const DetectionFrame& frame) {
  json dets = json::array();
  for (const auto& d : frame.detections) {
    dets.push_back({{"kind", to_string(d.kind)},
                    {"class", d.class_label},
                    {"score", d.score},
                    {"bbox", {d.bbox.x_min, d.bbox.y_min, d.bbox.x_max, d.bbox.y_max}}});
  }
  return {{"frame", frame.frame}, {"detections", dets}};
}

LandmarkSet2D landmarks_from_json(const json& j) {
  constexpr ErrorCode S = ErrorCode::SchemaError;
  return guarded(S, "landmarks", [&] {
    check_keys(j, {"frame", "face_id", "landmarks"}, S, "landmark line");
    LandmarkSet2D lm;
    lm.frame = integer(j, "frame", S, "landmark line");
    lm.face_id = integer(j, "face_id", S, "landmark line");
    const json& points = j.at("landmarks");
    if (!points.is_object()) throw Error(S, "landmarks must be an object of name: [u, v]");
    for (const auto& [name, uv] : points.items()) {
      if (!uv.is_array() || uv.size() != 2) throw Error(S, "landmark '" + name + "' must be [u, v]");
      lm.names.push_back(name);
      lm.points.emplace_back(uv[0].get<double>(), uv[1].get<double>());
    }
    return lm;
  });
}

json to_json(const LandmarkSet2D& lm) {
  json points = json::object();
  for (std::size_t i = 0; i < lm.names.size(); ++i) points[lm.names[i]] = {lm.points[i].x(), lm.points[i].y()};
  return {{"frame", lm.frame}, {"face_id", lm.face_id}, {"landmarks", points}};
}

TimelineStep timeline_step_from_json(const json& j) {
  constexpr ErrorCode S = ErrorCode::SchemaError;
  return guarded(S, "timeline", [&] {
    check_keys(j, {"t", "persons"}, S, "timeline line");
    TimelineStep step;
    step.t = number(j, "t", S, "timeline line");
    if (!std::isfinite(step.t)) throw Error(S, "timeline t must be finite");
    for (const auto& p : j.value("persons", json::array())) {
      check_keys(p, {"id", "attending"}, S, "timeline person");
      step.persons.emplace_back(integer(p, "id", S, "timeline person"), p.at("attending").get<bool>());
    }
    return step;
  });
}

// ---------------------------------------------------------------------------
// Outputs

json map_to_json(const SemanticMap& map) {
  json objects = json::array();
  for (const auto& [id, obj] : map.objects()) {
    objects.push_back({{"id", id},
                       {"class", obj.class_label},
                       {"centroid", vec_json(obj.centroid)},
                       {"aabb", {{"min", vec_json(obj.aabb.min)}, {"max", vec_json(obj.aabb.max)}}},
                       {"num_points", obj.world.size()},
                       {"num_observations", obj.observations.size()}});
  }
  return {{"objects", objects}};
}

json to_json(const MetricsReport& m) {
  json matches = json::array();
  for (const auto& x : m.matches) {
    matches.push_back(
        {{"object", x.object}, {"gt_index", x.gt_index}, {"duplicate", x.duplicate}, {"error_m", x.error}});
  }
  json triggers = json::array();
  for (const auto& t : m.triggers) {
    triggers.push_back({{"face_track", t.face_track}, {"person_index", t.person_index}, {"t", t.t}});
  }
  json windows = json::array();
  for (const auto& [person, w] : m.attention_windows) {
    windows.push_back({{"person", person}, {"start", w.start}, {"end", w.end}});
  }
  return {{"gt_object_count", m.gt_object_count},
          {"registered_count", m.registered_count},
          {"matched_count", m.matched_count},
          {"duplicate_count", m.duplicate_count},
          {"precision", m.precision},
          {"recall", m.recall},
          {"centroid_rmse_m", m.centroid_rmse},
          {"spurious_confirmations", m.spurious_confirmations},
          {"matches", matches},
          {"willingness", {{"triggers", triggers}, {"attention_windows", windows}}}};
}

namespace {

const char* source_name(DetectionSource::Kind kind) {
  switch (kind) {
    case DetectionSource::Kind::Object: return "object";
    case DetectionSource::Kind::FalsePositive: return "false_positive";
    case DetectionSource::Kind::Face: return "face";
  }
  return "object";
}

}  // namespace

json to_json(const FrameEvent& ev) {
  json j = {{"frame", ev.frame}, {"t", ev.t}, {"detections", ev.detections}};
  if (ev.correction) {
    json pairs = json::array();
    for (const auto& [s, a] : ev.correction->merged) pairs.push_back({s, a});
    j["correction"] = {{"merged", pairs},
                       {"objects_before", ev.correction->objects_before},
                       {"objects_after", ev.correction->objects_after}};
  }
  json confs = json::array();
  for (const auto& c : ev.confirmations) {
    json cj = {{"track", c.track},
               {"class", c.class_label},
               {"source", source_name(c.source.kind)},
               {"source_index", c.source.index}};
    if (c.object) {
      cj["object"] = *c.object;
      cj["created"] = c.created;
      cj["points"] = c.points;
    } else {
      cj["skipped"] = c.skipped;
    }
    confs.push_back(std::move(cj));
  }
  j["confirmations"] = std::move(confs);
  j["registry_size"] = ev.registry_size;
  json faces = json::array();
  for (const auto& f : ev.faces) {
    json fj = {{"track", f.track}, {"person_index", f.person_index}, {"solved", f.solved}};
    if (f.solved) {
      fj["yaw"] = f.pose.yaw;
      fj["pitch"] = f.pose.pitch;
      fj["roll"] = f.pose.roll;
      fj["rms"] = f.pose.rms_residual;
    }
    fj["attending"] = f.attending;
    fj["willingness"] = f.willingness;
    faces.push_back(std::move(fj));
  }
  j["faces"] = std::move(faces);
  j["triggers"] = ev.triggers;
  return j;
}

}  // namespace semmap::io

namespace semmap {

FaceModel3D FaceModel3D::load(const std::filesystem::path& path) { return io::load_face_model(path); }

}  // namespace semmap
