#include "semmap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>

namespace semmap {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::InvalidArgument, "image size must be positive");
  }
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
    throw Error(ErrorCode::InvalidArgument, "principal point outside the image");
  }
}

RigidPose::RigidPose(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  const double ortho = (rotation_.transpose() * rotation_ - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (!(ortho < 1e-9) || std::abs(rotation_.determinant() - 1.0) > 1e-9 || !translation_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "rotation is not a proper orthonormal matrix");
  }
}

RigidPose RigidPose::look_at(const Vec3& position, const Vec3& target) {
  const Vec3 forward = (target - position).normalized();
  Vec3 right = forward.cross(Vec3::UnitZ());
  if (right.norm() < 1e-9) {
    // Looking straight up or down; any horizontal right axis will do.
    right = Vec3::UnitX();
  }
  right.normalize();
  const Vec3 down = forward.cross(right);
  Mat3 r;
  r.col(0) = right;
  r.col(1) = down;
  r.col(2) = forward;
  return {r, position};
}

RigidPose RigidPose::inverse() const {
  const Mat3 rt = rotation_.transpose();
  RigidPose out;
  out.rotation_ = rt;
  out.translation_ = -(rt * translation_);
  return out;
}

RigidPose RigidPose::operator*(const RigidPose& rhs) const {
  RigidPose out;
  out.rotation_ = rotation_ * rhs.rotation_;
  out.translation_ = rotation_ * rhs.translation_ + translation_;
  return out;
}

double RigidPose::max_abs_diff(const RigidPose& other) const {
  return std::max((rotation_ - other.rotation_).cwiseAbs().maxCoeff(),
                  (translation_ - other.translation_).cwiseAbs().maxCoeff());
}

const char* to_string(Frame f) {
  switch (f) {
    case Frame::World: return "world";
    case Frame::KeyframeLocal: return "keyframe-local";
    case Frame::Camera: return "camera";
  }
  return "unknown";
}

Vec3 PointCloud::centroid() const {
  if (points.empty()) {
    throw Error(ErrorCode::EmptyCloud, "centroid of an empty cloud");
  }
  Vec3 sum = Vec3::Zero();
  for (const auto& p : points) sum += p;
  return sum / static_cast<double>(points.size());
}

void require_same_frame(const PointCloud& a, const PointCloud& b) {
  if (a.frame != b.frame) {
    throw Error(ErrorCode::FrameMismatch,
                std::string("cannot combine ") + to_string(a.frame) + " and " + to_string(b.frame) + " clouds");
  }
}

PointCloud transform(const PointCloud& cloud, const RigidPose& pose, Frame target) {
  PointCloud out(target);
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back(pose.apply(p));
  return out;
}

Projection project(const Vec3& world_point, const RigidPose& pose, const CameraIntrinsics& k) {
  const Vec3 c = pose.rotation().transpose() * (world_point - pose.translation());
  if (!(c.z() > 1e-9)) {
    throw Error(ErrorCode::NonPositiveDepth, "point is not in front of the camera");
  }
  return {k.cx + k.fx * c.x() / c.z(), k.cy + k.fy * c.y() / c.z(), c.z()};
}

Vec3 backproject(double u, double v, double depth, const RigidPose& pose, const CameraIntrinsics& k) {
  if (!valid_depth(depth)) {
    throw Error(ErrorCode::InvalidDepth, "depth must be finite and positive");
  }
  if (!k.contains(u, v)) {
    throw Error(ErrorCode::PixelOutOfBounds, "pixel (" + std::to_string(u) + ", " + std::to_string(v) + ")");
  }
  const Vec3 c((u - k.cx) * depth / k.fx, (v - k.cy) * depth / k.fy, depth);
  return pose.apply(c);
}

namespace {

struct PixelRange {
  int u0, u1, v0, v1;  // half-open
};

PixelRange clip(const Rect& bbox, const CameraIntrinsics& k) {
  PixelRange r;
  r.u0 = std::max(0, static_cast<int>(std::ceil(bbox.x_min)));
  r.v0 = std::max(0, static_cast<int>(std::ceil(bbox.y_min)));
  r.u1 = std::min(k.width, static_cast<int>(std::ceil(bbox.x_max)));
  r.v1 = std::min(k.height, static_cast<int>(std::ceil(bbox.y_max)));
  return r;
}

}  // namespace

double depth_band(const Rect& clipped_bbox, double median_depth, const CameraIntrinsics& k,
                  const ExtractionOptions& opts) {
  const double metric_w = clipped_bbox.width() * median_depth / k.fx;
  const double metric_h = clipped_bbox.height() * median_depth / k.fy;
  return std::clamp(0.5 * std::max(metric_w, metric_h), opts.min_band, opts.max_band);
}

PointCloud extract_object_cloud(const Rect& bbox, const DepthImage& depth, const RigidPose& pose,
                                const CameraIntrinsics& k, const ExtractionOptions& opts) {
  if (opts.stride < 1) {
    throw Error(ErrorCode::InvalidArgument, "stride must be >= 1");
  }
  if (depth.width != k.width || depth.height != k.height) {
    throw Error(ErrorCode::InvalidArgument, "depth image does not match the intrinsics");
  }
  if (!bbox.valid()) {
    throw Error(ErrorCode::InvalidArgument, "degenerate bounding box");
  }
  const PixelRange r = clip(bbox, k);

  struct Sample {
    int u, v;
    double d;
  };
  std::vector<Sample> samples;
  for (int v = r.v0; v < r.v1; v += opts.stride) {
    for (int u = r.u0; u < r.u1; u += opts.stride) {
      const double d = depth.at(u, v);
      if (valid_depth(d)) samples.push_back({u, v, d});
    }
  }
  if (samples.empty()) {
    throw Error(ErrorCode::EmptyCloud, "no valid depth inside the bounding box");
  }

  std::vector<double> depths;
  depths.reserve(samples.size());
  for (const auto& s : samples) depths.push_back(s.d);
  const std::size_t mid = depths.size() / 2;
  std::nth_element(depths.begin(), depths.begin() + static_cast<std::ptrdiff_t>(mid), depths.end());
  double median = depths[mid];
  if (depths.size() % 2 == 0) {
    const double lower = *std::max_element(depths.begin(), depths.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }

  const Rect clipped{static_cast<double>(r.u0), static_cast<double>(r.v0), static_cast<double>(r.u1),
                     static_cast<double>(r.v1)};
  const double band = depth_band(clipped, median, k, opts);

  PointCloud cloud(Frame::World);
  for (const auto& s : samples) {
    if (std::abs(s.d - median) <= band) {
      cloud.points.push_back(backproject(s.u, s.v, s.d, pose, k));
    }
  }
  return cloud;
}

PointCloud voxel_downsample(const PointCloud& cloud, double leaf) {
  if (!(leaf > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "voxel leaf must be positive");
  }
  using Key = std::tuple<std::int64_t, std::int64_t, std::int64_t>;
  struct Acc {
    Vec3 sum = Vec3::Zero();
    std::size_t n = 0;
  };
  std::map<Key, Acc> voxels;
  for (const auto& p : cloud.points) {
    const Key key{static_cast<std::int64_t>(std::floor(p.x() / leaf)),
                  static_cast<std::int64_t>(std::floor(p.y() / leaf)),
                  static_cast<std::int64_t>(std::floor(p.z() / leaf))};
    auto& acc = voxels[key];
    acc.sum += p;
    ++acc.n;
  }
  PointCloud out(cloud.frame);
  out.points.reserve(voxels.size());
  for (const auto& [key, acc] : voxels) {
    out.points.push_back(acc.n == 1 ? acc.sum : Vec3(acc.sum / static_cast<double>(acc.n)));
  }
  return out;
}

Aabb bounding_box(const PointCloud& cloud) {
  if (cloud.empty()) {
    throw Error(ErrorCode::EmptyCloud, "bounding box of an empty cloud");
  }
  Aabb box{cloud.points.front(), cloud.points.front()};
  for (const auto& p : cloud.points) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

}  // namespace semmap
