#pragma once

// Independent reference computations used by the unit and acceptance suites.
// Nothing here calls into the code path it is used to check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "semmap/geometry.hpp"
#include "semmap/headpose.hpp"
#include "semmap/simulator.hpp"

namespace semmap::oracle {

/// O(n^2) mean nearest-neighbor distance from `a` into `b`.
inline double mean_nn_brute(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double sum = 0.0;
  for (const auto& p : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b) best = std::min(best, (q - p).norm());
    sum += best;
  }
  return sum / static_cast<double>(a.size());
}

inline double chamfer_brute(const PointCloud& a, const PointCloud& b) {
  return 0.5 * (mean_nn_brute(a.points, b.points) + mean_nn_brute(b.points, a.points));
}

inline double overlap_brute(const PointCloud& a, const PointCloud& b, double radius) {
  const auto& small = b.size() < a.size() ? b.points : a.points;
  const auto& large = b.size() < a.size() ? a.points : b.points;
  std::size_t inside = 0;
  for (const auto& p : small) {
    for (const auto& q : large) {
      if ((q - p).norm() <= radius) {
        ++inside;
        break;
      }
    }
  }
  return static_cast<double>(inside) / static_cast<double>(small.size());
}

/// Counts unit pixels covered by integer-aligned rectangles.
inline double iou_rasterized(const Rect& a, const Rect& b) {
  const int x0 = static_cast<int>(std::min(a.x_min, b.x_min));
  const int y0 = static_cast<int>(std::min(a.y_min, b.y_min));
  const int x1 = static_cast<int>(std::max(a.x_max, b.x_max));
  const int y1 = static_cast<int>(std::max(a.y_max, b.y_max));
  long inter = 0, uni = 0;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const double cx = x + 0.5, cy = y + 0.5;
      const bool in_a = cx > a.x_min && cx < a.x_max && cy > a.y_min && cy < a.y_max;
      const bool in_b = cx > b.x_min && cx < b.x_max && cy > b.y_min && cy < b.y_max;
      inter += (in_a && in_b);
      uni += (in_a || in_b);
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Central finite differences of the reprojection residuals.
inline Eigen::MatrixXd numeric_jacobian(const Vec6& params, const Correspondences& c, const CameraIntrinsics& k,
                                        double h = 1e-6) {
  const auto residual = [&](const Vec6& x) {
    Eigen::VectorXd r(2 * static_cast<Eigen::Index>(c.model.size()));
    const double theta = x.head<3>().norm();
    const Mat3 rot = theta < 1e-15 ? Mat3::Identity()
                                   : Eigen::AngleAxisd(theta, x.head<3>() / theta).toRotationMatrix();
    for (std::size_t j = 0; j < c.model.size(); ++j) {
      const Vec3 p = rot * c.model[j] + x.tail<3>();
      r(2 * static_cast<Eigen::Index>(j)) = k.cx + k.fx * p.x() / p.z() - c.image[j].x();
      r(2 * static_cast<Eigen::Index>(j) + 1) = k.cy + k.fy * p.y() / p.z() - c.image[j].y();
    }
    return r;
  };
  Eigen::MatrixXd jac(2 * static_cast<Eigen::Index>(c.model.size()), 6);
  for (int i = 0; i < 6; ++i) {
    Vec6 plus = params, minus = params;
    plus(i) += h;
    minus(i) -= h;
    jac.col(i) = (residual(plus) - residual(minus)) / (2.0 * h);
  }
  return jac;
}

/// Exact pinhole projection of model points under (R, t); bypasses the solver code.
inline Correspondences synthesize(const FaceModel3D& model, const Mat3& r, const Vec3& t, const CameraIntrinsics& k) {
  Correspondences c;
  for (std::size_t i = 0; i < model.points.size(); ++i) {
    const Vec3 p = r * model.points[i] + t;
    c.names.push_back(model.names[i]);
    c.model.push_back(model.points[i]);
    c.image.emplace_back(k.cx + k.fx * p.x() / p.z(), k.cy + k.fy * p.y() / p.z());
  }
  return c;
}

inline Mat3 euler_compose(double yaw, double pitch, double roll) {
  const double d = std::numbers::pi / 180.0;
  const double a = yaw * d, b = pitch * d, g = roll * d;
  Mat3 ry, rx, rz;
  ry << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  rx << 1, 0, 0, 0, std::cos(b), -std::sin(b), 0, std::sin(b), std::cos(b);
  rz << std::cos(g), -std::sin(g), 0, std::sin(g), std::cos(g), 0, 0, 0, 1;
  return ry * rx * rz;
}

inline double rotation_error_deg(const Mat3& a, const Mat3& b) {
  const double c = std::clamp(((a * b.transpose()).trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

/// Piecewise-linear willingness value under a list of (attending, duration) segments, from 0.
inline double willingness_closed_form(const std::vector<std::pair<bool, double>>& segments, double t, double up,
                                      double down) {
  double v = 0.0, elapsed = 0.0;
  for (const auto& [attending, duration] : segments) {
    const double dt = std::min(duration, t - elapsed);
    if (dt <= 0.0) break;
    v = std::clamp(v + (attending ? up : -down) * dt, 0.0, 1.0);
    elapsed += dt;
  }
  return v;
}

struct Counts {
  std::size_t matched = 0;
  std::size_t duplicates = 0;
  double precision = 1.0;
  double recall = 1.0;
};

/// Brute-force recount of precision/recall over (class, centroid) pairs: a ground-truth
/// object counts as found when any same-class registered centroid lies within `radius`;
/// a registered object is correct when it is the lowest id among those nearest to the
/// ground truth it is nearest to.
inline Counts count_matches(const std::vector<std::pair<std::string, Vec3>>& registered,
                            const std::vector<WorldObject>& gt, double radius) {
  Counts c;
  std::vector<int> nearest(registered.size(), -1);
  for (std::size_t r = 0; r < registered.size(); ++r) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (gt[g].class_label != registered[r].first) continue;
      const double d = (gt[g].centroid - registered[r].second).norm();
      if (d <= radius && d < best) {
        best = d;
        nearest[r] = static_cast<int>(g);
      }
    }
  }
  for (std::size_t g = 0; g < gt.size(); ++g) {
    const auto n = static_cast<std::size_t>(std::count(nearest.begin(), nearest.end(), static_cast<int>(g)));
    if (n > 0) {
      ++c.matched;
      c.duplicates += n - 1;
    }
  }
  if (!registered.empty()) c.precision = static_cast<double>(c.matched) / static_cast<double>(registered.size());
  if (!gt.empty()) c.recall = static_cast<double>(c.matched) / static_cast<double>(gt.size());
  return c;
}

inline RigidPose random_pose(std::mt19937_64& rng, double max_translation = 2.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec3 axis(u(rng), u(rng), u(rng));
  if (axis.norm() < 1e-6) axis = Vec3::UnitX();
  const double angle = std::numbers::pi * u(rng);
  return {Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix(),
          Vec3(u(rng), u(rng), u(rng)) * max_translation};
}

inline PointCloud random_cloud(std::mt19937_64& rng, std::size_t n, double extent, const Vec3& offset = Vec3::Zero()) {
  std::uniform_real_distribution<double> u(0.0, extent);
  PointCloud c(Frame::World);
  for (std::size_t i = 0; i < n; ++i) c.points.push_back(offset + Vec3(u(rng), u(rng), u(rng)));
  return c;
}

}  // namespace semmap::oracle
