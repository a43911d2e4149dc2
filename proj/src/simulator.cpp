#include "semmap/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace semmap {

namespace {

constexpr double kNear = 0.05;      // m, samples closer than this hide the object
constexpr int kMinBoxPixels = 4;    // visible boxes narrower than this are not reported
constexpr double kFacePadding = 0.3;

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

double surface_area(const Vec3& e) { return 2.0 * (e.x() * e.y() + e.y() * e.z() + e.x() * e.z()); }

Rect clip_to_image(Rect r, const CameraIntrinsics& k) {
  r.x_min = std::clamp(r.x_min, 0.0, static_cast<double>(k.width));
  r.x_max = std::clamp(r.x_max, 0.0, static_cast<double>(k.width));
  r.y_min = std::clamp(r.y_min, 0.0, static_cast<double>(k.height));
  r.y_max = std::clamp(r.y_max, 0.0, static_cast<double>(k.height));
  return r;
}

}  // namespace

bool ScenarioPerson::attending_at(double t) const {
  return std::any_of(attention.begin(), attention.end(),
                     [t](const AttentionWindow& w) { return t >= w.start && t < w.end; });
}

void Scenario::validate() const {
  const auto fail = [](const std::string& what) { throw Error(ErrorCode::SchemaError, what); };
  try {
    intrinsics.validate();
  } catch (const Error& e) {
    fail(std::string("intrinsics: ") + e.what());
  }
  if (trajectory.empty()) fail("trajectory must contain at least one pose");
  const auto prob = [&](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) fail(std::string(name) + " must be in [0, 1]");
  };
  prob(noise.dropout_prob, "noise.dropout_prob");
  prob(noise.false_positive_rate, "noise.false_positive_rate");
  if (!(noise.bbox_jitter_px >= 0.0) || !(noise.depth_noise_m >= 0.0) || !(noise.landmark_px >= 0.0)) {
    fail("noise standard deviations must be non-negative");
  }
  if (!(background_depth > 0.0)) fail("background_depth must be positive");
  if (!(max_range > 0.0)) fail("max_range must be positive");
  if (!(fps > 0.0)) fail("fps must be positive");
  for (const auto& o : objects) {
    if (o.class_label.empty()) fail("object class must be non-empty");
    if (!((o.extents.array() > 0.0).all())) fail("object extents must be positive");
    if (o.samples < 1) fail("object samples must be >= 1");
  }
  for (const auto& c : corrections) {
    if (c.frame < 0 || static_cast<std::size_t>(c.frame) >= trajectory.size()) {
      fail("correction frame " + std::to_string(c.frame) + " outside the trajectory");
    }
  }
  if (drift.start_frame < 0) fail("drift.start_frame must be >= 0");
  try {
    face_model.validate();
  } catch (const Error& e) {
    fail(std::string("face_model: ") + e.what());
  }
}

std::vector<Vec3> surface_samples(const Scenario& scenario, std::size_t object_index) {
  const WorldObject& obj = scenario.objects.at(object_index);
  auto rng = make_rng(scenario.seed, 0x5a3f1e, object_index);
  const Vec3 half = 0.5 * obj.extents;
  const Vec3& e = obj.extents;
  // Faces as (normal axis, sign); weights are face areas.
  const std::array<double, 3> axis_area{e.y() * e.z(), e.x() * e.z(), e.x() * e.y()};
  std::discrete_distribution<int> pick_face{axis_area[0], axis_area[0], axis_area[1],
                                            axis_area[1], axis_area[2], axis_area[2]};
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(obj.samples));
  for (int i = 0; i < obj.samples; ++i) {
    const int face = pick_face(rng);
    const int axis = face / 2;
    const double sign = (face % 2 == 0) ? 1.0 : -1.0;
    Vec3 local(unit(rng) * half.x(), unit(rng) * half.y(), unit(rng) * half.z());
    local(axis) = sign * half(axis);
    pts.push_back(obj.centroid + local);
  }
  return pts;
}

RigidPose estimated_pose(const Scenario& scenario, std::size_t frame_idx) {
  if (frame_idx >= scenario.trajectory.size()) {
    throw Error(ErrorCode::FrameOutOfRange, "frame " + std::to_string(frame_idx));
  }
  const auto k = static_cast<long>(frame_idx);
  long first = scenario.drift.start_frame;
  for (const auto& c : scenario.corrections) {
    if (c.frame <= k) first = std::max<long>(first, c.frame + 1);
  }
  long last = k;
  if (scenario.drift.end_frame >= 0) last = std::min<long>(last, scenario.drift.end_frame);
  const double steps = static_cast<double>(std::max<long>(0, last - first + 1));

  const RigidPose& truth = scenario.trajectory[frame_idx];
  if (steps == 0.0) return truth;
  const double yaw = steps * scenario.drift.yaw_deg_per_frame * std::numbers::pi / 180.0;
  const RigidPose drift(Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix(),
                        steps * scenario.drift.translation_per_frame);
  return drift * truth;
}

Mat3 true_head_rotation(const ScenarioPerson& person, double t) {
  if (person.attending_at(t)) return Mat3::Identity();
  return Eigen::AngleAxisd(person.away_yaw_deg * std::numbers::pi / 180.0, Vec3::UnitY()).toRotationMatrix();
}

SyntheticFrame synthesize_frame(const Scenario& scenario, std::size_t frame_idx) {
  if (frame_idx >= scenario.trajectory.size()) {
    throw Error(ErrorCode::FrameOutOfRange,
                "frame " + std::to_string(frame_idx) + " of " + std::to_string(scenario.trajectory.size()));
  }
  const CameraIntrinsics& k = scenario.intrinsics;
  const NoiseModel& noise = scenario.noise;
  auto rng = make_rng(scenario.seed, 0xf4a3e, frame_idx);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SyntheticFrame out;
  out.true_pose = scenario.trajectory[frame_idx];
  out.pose_estimate = estimated_pose(scenario, frame_idx);
  out.depth = DepthImage(k.width, k.height, static_cast<float>(scenario.background_depth));
  const RigidPose world_to_camera = out.true_pose.inverse();

  for (std::size_t i = 0; i < scenario.objects.size(); ++i) {
    const WorldObject& obj = scenario.objects[i];
    const Vec3 centre_cam = world_to_camera.apply(obj.centroid);
    if (centre_cam.z() <= kNear || centre_cam.z() > scenario.max_range) continue;

    const std::vector<Vec3> samples = surface_samples(scenario, i);
    std::vector<Vec3> cam;
    cam.reserve(samples.size());
    bool behind = false;
    for (const auto& p : samples) {
      cam.push_back(world_to_camera.apply(p));
      if (cam.back().z() <= kNear) behind = true;
    }
    if (behind) continue;

    const double spacing = std::sqrt(surface_area(obj.extents) / static_cast<double>(obj.samples));
    Rect hull{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
              -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& c : cam) {
      const double u = k.cx + k.fx * c.x() / c.z();
      const double v = k.cy + k.fy * c.y() / c.z();
      hull.x_min = std::min(hull.x_min, u);
      hull.y_min = std::min(hull.y_min, v);
      hull.x_max = std::max(hull.x_max, u);
      hull.y_max = std::max(hull.y_max, v);

      // Square splat wide enough to close the gaps between neighboring samples.
      const int radius = std::clamp(static_cast<int>(std::ceil(0.75 * k.fx * spacing / c.z())), 1, 16);
      const int uc = static_cast<int>(std::lround(u));
      const int vc = static_cast<int>(std::lround(v));
      const auto z = static_cast<float>(c.z());
      for (int dv = -radius; dv <= radius; ++dv) {
        const int pv = vc + dv;
        if (pv < 0 || pv >= k.height) continue;
        for (int du = -radius; du <= radius; ++du) {
          const int pu = uc + du;
          if (pu < 0 || pu >= k.width) continue;
          float& d = out.depth.at(pu, pv);
          d = std::min(d, z);
        }
      }
    }

    Rect box = clip_to_image(hull, k);
    if (box.width() < kMinBoxPixels || box.height() < kMinBoxPixels) continue;
    if (noise.dropout_prob > 0.0 && uniform(rng) < noise.dropout_prob) continue;
    if (noise.bbox_jitter_px > 0.0) {
      box.x_min += noise.bbox_jitter_px * gauss(rng);
      box.y_min += noise.bbox_jitter_px * gauss(rng);
      box.x_max += noise.bbox_jitter_px * gauss(rng);
      box.y_max += noise.bbox_jitter_px * gauss(rng);
      box = clip_to_image(box, k);
      if (!box.valid()) continue;
    }
    out.detections.push_back({box, obj.class_label, 1.0, DetectionKind::Object});
    out.sources.push_back({DetectionSource::Kind::Object, static_cast<int>(i)});
    out.landmarks.emplace_back();
  }

  if (noise.depth_noise_m > 0.0) {
    for (auto& d : out.depth.data) {
      d = std::max(1e-3f, d + static_cast<float>(noise.depth_noise_m * gauss(rng)));
    }
  }

  if (noise.false_positive_rate > 0.0 && uniform(rng) < noise.false_positive_rate) {
    std::vector<std::string> classes = scenario.false_positive_classes;
    if (classes.empty()) {
      for (const auto& o : scenario.objects) classes.push_back(o.class_label);
    }
    if (classes.empty()) classes.push_back("clutter");
    const std::size_t cls = static_cast<std::size_t>(uniform(rng) * static_cast<double>(classes.size()));
    const double w = 20.0 + 100.0 * uniform(rng);
    const double h = 20.0 + 100.0 * uniform(rng);
    const double u = uniform(rng) * (k.width - w);
    const double v = uniform(rng) * (k.height - h);
    const double score = 0.3 + 0.7 * uniform(rng);
    out.detections.push_back(
        {Rect{u, v, u + w, v + h}, classes[std::min(cls, classes.size() - 1)], score, DetectionKind::Object});
    out.sources.push_back({DetectionSource::Kind::FalsePositive, -1});
    out.landmarks.emplace_back();
  }

  const double t = static_cast<double>(frame_idx) / scenario.fps;
  for (std::size_t p = 0; p < scenario.persons.size(); ++p) {
    const ScenarioPerson& person = scenario.persons[p];
    const Vec3 head = world_to_camera.apply(person.head_position);
    if (head.z() <= kNear || head.z() > scenario.max_range) continue;
    const Mat3 rot = true_head_rotation(person, t);

    LandmarkSet2D lm;
    lm.frame = static_cast<std::int64_t>(frame_idx);
    lm.face_id = person.id;
    bool visible = true;
    for (std::size_t j = 0; j < scenario.face_model.points.size(); ++j) {
      const Vec3 c = rot * scenario.face_model.points[j] + head;
      if (c.z() <= kNear) {
        visible = false;
        break;
      }
      Vec2 px(k.cx + k.fx * c.x() / c.z(), k.cy + k.fy * c.y() / c.z());
      if (noise.landmark_px > 0.0) {
        px.x() += noise.landmark_px * gauss(rng);
        px.y() += noise.landmark_px * gauss(rng);
      }
      if (!k.contains(px.x(), px.y())) {
        visible = false;
        break;
      }
      lm.names.push_back(scenario.face_model.names[j]);
      lm.points.push_back(px);
    }
    if (!visible) continue;

    Rect box{lm.points[0].x(), lm.points[0].y(), lm.points[0].x(), lm.points[0].y()};
    for (const auto& q : lm.points) {
      box.x_min = std::min(box.x_min, q.x());
      box.y_min = std::min(box.y_min, q.y());
      box.x_max = std::max(box.x_max, q.x());
      box.y_max = std::max(box.y_max, q.y());
    }
    const double pad_u = kFacePadding * box.width() + 1.0;
    const double pad_v = kFacePadding * box.height() + 1.0;
    box = clip_to_image({box.x_min - pad_u, box.y_min - pad_v, box.x_max + pad_u, box.y_max + pad_v}, k);
    out.detections.push_back({box, "face", 1.0, DetectionKind::Face});
    out.sources.push_back({DetectionSource::Kind::Face, static_cast<int>(p)});
    out.landmarks.emplace_back(std::move(lm));
  }
  return out;
}

}  // namespace semmap
