#include "semmap/spatial_hash.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace semmap {

std::size_t SpatialHash::KeyHash::operator()(const Key& k) const noexcept {
  std::size_t h = static_cast<std::size_t>(k[0]) * 73856093u;
  h ^= static_cast<std::size_t>(k[1]) * 19349663u;
  h ^= static_cast<std::size_t>(k[2]) * 83492791u;
  return h;
}

SpatialHash::SpatialHash(const std::vector<Vec3>& points, double cell) : points_(&points), cell_(cell) {
  if (!(cell > 0.0)) throw Error(ErrorCode::InvalidArgument, "hash cell must be positive");
  if (points.empty()) throw Error(ErrorCode::EmptyCloud, "cannot index an empty cloud");
  lo_ = hi_ = key_of(points.front());
  cells_.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Key k = key_of(points[i]);
    for (int a = 0; a < 3; ++a) {
      lo_[a] = std::min(lo_[a], k[a]);
      hi_[a] = std::max(hi_[a], k[a]);
    }
    cells_[k].push_back(static_cast<std::uint32_t>(i));
  }
}

SpatialHash::Key SpatialHash::key_of(const Vec3& p) const {
  return {static_cast<std::int64_t>(std::floor(p.x() / cell_)), static_cast<std::int64_t>(std::floor(p.y() / cell_)),
          static_cast<std::int64_t>(std::floor(p.z() / cell_))};
}

SpatialHash::Nearest SpatialHash::linear_scan(const Vec3& q) const {
  Nearest best{0, std::numeric_limits<double>::infinity()};
  const auto& pts = *points_;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = (pts[i] - q).norm();
    if (d < best.distance) best = {i, d};
  }
  return best;
}

SpatialHash::Nearest SpatialHash::nearest(const Vec3& q) const {
  const Key c = key_of(q);
  // Shells beyond this radius cannot contain an occupied cell.
  std::int64_t max_shell = 0;
  for (int a = 0; a < 3; ++a) {
    max_shell = std::max({max_shell, std::abs(c[a] - lo_[a]), std::abs(c[a] - hi_[a])});
  }

  Nearest best{0, std::numeric_limits<double>::infinity()};
  std::size_t visited = 0;
  const std::size_t budget = points_->size();
  for (std::int64_t s = 0; s <= max_shell; ++s) {
    // A point in shell s is at least (s - 1) cells away from q.
    if (s >= 1 && best.distance <= static_cast<double>(s - 1) * cell_) break;
    const std::int64_t side = 2 * s + 1;
    const std::size_t shell_cells =
        static_cast<std::size_t>(side * side * side - (s == 0 ? 0 : (side - 2) * (side - 2) * (side - 2)));
    visited += shell_cells;
    if (visited > budget + 27) return linear_scan(q);

    for (std::int64_t dx = -s; dx <= s; ++dx) {
      for (std::int64_t dy = -s; dy <= s; ++dy) {
        const bool on_face = std::abs(dx) == s || std::abs(dy) == s;
        const std::int64_t dz_step = on_face ? 1 : std::max<std::int64_t>(1, 2 * s);
        for (std::int64_t dz = -s; dz <= s; dz += dz_step) {
          const auto it = cells_.find({c[0] + dx, c[1] + dy, c[2] + dz});
          if (it == cells_.end()) continue;
          for (const std::uint32_t i : it->second) {
            const double d = ((*points_)[i] - q).norm();
            if (d < best.distance || (d == best.distance && i < best.index)) best = {i, d};
          }
        }
      }
    }
  }
  return best;
}

bool SpatialHash::any_within(const Vec3& q, double radius) const {
  const auto reach = static_cast<std::int64_t>(std::ceil(radius / cell_));
  const double side = static_cast<double>(2 * reach + 1);
  if (side * side * side > static_cast<double>(points_->size())) {
    for (const auto& p : *points_) {
      if ((p - q).norm() <= radius) return true;
    }
    return false;
  }
  const Key c = key_of(q);
  for (std::int64_t dx = -reach; dx <= reach; ++dx) {
    for (std::int64_t dy = -reach; dy <= reach; ++dy) {
      for (std::int64_t dz = -reach; dz <= reach; ++dz) {
        const auto it = cells_.find({c[0] + dx, c[1] + dy, c[2] + dz});
        if (it == cells_.end()) continue;
        for (const std::uint32_t i : it->second) {
          if (((*points_)[i] - q).norm() <= radius) return true;
        }
      }
    }
  }
  return false;
}

}  // namespace semmap
