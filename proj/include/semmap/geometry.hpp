#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <cstddef>
#include <vector>

#include "semmap/error.hpp"

namespace semmap {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Pinhole intrinsics without distortion.
struct CameraIntrinsics {
  double fx = 500.0;
  double fy = 500.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;

  /// Throws InvalidArgument unless fx, fy > 0 and the principal point lies inside the image.
  void validate() const;
  bool contains(double u, double v) const {
    return u >= 0.0 && v >= 0.0 && u < static_cast<double>(width) && v < static_cast<double>(height);
  }
};

/// Camera-to-world rigid transform.
class RigidPose {
 public:
  RigidPose() = default;
  RigidPose(const Mat3& rotation, const Vec3& translation);

  static RigidPose identity() { return {}; }
  static RigidPose from_translation(const Vec3& t) { return {Mat3::Identity(), t}; }
  /// Camera looking from `position` at `target`; world up is +z, camera axes are x right, y down, z forward.
  static RigidPose look_at(const Vec3& position, const Vec3& target);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  RigidPose inverse() const;
  RigidPose operator*(const RigidPose& rhs) const;

  /// Max elementwise deviation of the 3x4 matrices.
  double max_abs_diff(const RigidPose& other) const;

 private:
  Mat3 rotation_ = Mat3::Identity();
  Vec3 translation_ = Vec3::Zero();
};

enum class Frame { World, KeyframeLocal, Camera };

const char* to_string(Frame f);

struct PointCloud {
  Frame frame = Frame::World;
  std::vector<Vec3> points;

  PointCloud() = default;
  explicit PointCloud(Frame f, std::vector<Vec3> pts = {}) : frame(f), points(std::move(pts)) {}

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  Vec3 centroid() const;
};

/// Throws FrameMismatch when the two clouds live in different frames.
void require_same_frame(const PointCloud& a, const PointCloud& b);

/// Applies `pose` to every point and re-tags the result with `target`.
PointCloud transform(const PointCloud& cloud, const RigidPose& pose, Frame target);

/// Row-major depth in meters; 0 marks an invalid pixel.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  DepthImage() = default;
  DepthImage(int w, int h, float fill = 0.0f)
      : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  float at(int u, int v) const { return data[static_cast<std::size_t>(v) * width + u]; }
  float& at(int u, int v) { return data[static_cast<std::size_t>(v) * width + u]; }
};

inline bool valid_depth(double d) { return std::isfinite(d) && d > 0.0; }

/// Axis-aligned pixel rectangle (x_min, y_min, x_max, y_max).
struct Rect {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  bool valid() const { return x_min < x_max && y_min < y_max; }
};

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

/// Projects a world point through the camera at `pose`. Throws NonPositiveDepth when z <= 1e-9.
Projection project(const Vec3& world_point, const RigidPose& pose, const CameraIntrinsics& k);

/// Lifts pixel (u, v) at `depth` to the world frame.
Vec3 backproject(double u, double v, double depth, const RigidPose& pose, const CameraIntrinsics& k);

struct ExtractionOptions {
  int stride = 4;
  double min_band = 0.05;
  double max_band = 1.0;
};

/// Cuts the object cuboid behind `bbox` out of the depth image.
///
/// Every stride-th valid pixel inside the box is considered. The median of
/// their depths anchors a band of half-width
/// clamp(0.5 * max(metric box width, metric box height), min_band, max_band),
/// where the metric size is the pixel size scaled by median_depth / f.
/// Pixels outside the band are background and are dropped.
PointCloud extract_object_cloud(const Rect& bbox, const DepthImage& depth, const RigidPose& pose,
                                const CameraIntrinsics& k, const ExtractionOptions& opts = {});

/// Half-width of the depth band used by extract_object_cloud.
double depth_band(const Rect& clipped_bbox, double median_depth, const CameraIntrinsics& k,
                  const ExtractionOptions& opts = {});

/// One centroid per occupied voxel, ordered by voxel index.
PointCloud voxel_downsample(const PointCloud& cloud, double leaf);

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool contains(const Vec3& p, double eps = 0.0) const {
    return (p.array() >= min.array() - eps).all() && (p.array() <= max.array() + eps).all();
  }
};

Aabb bounding_box(const PointCloud& cloud);

}  // namespace semmap
