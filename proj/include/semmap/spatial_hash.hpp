#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "semmap/geometry.hpp"

namespace semmap {

/// Uniform hash grid over a point set for exact nearest-neighbor and radius queries.
///
/// Nearest queries walk Chebyshev shells of cells outward from the query cell
/// and stop once the next shell cannot hold anything closer. When the shell
/// walk would touch more cells than there are points, it switches to a linear
/// scan, so the answer is always the exact minimum.
class SpatialHash {
 public:
  SpatialHash(const std::vector<Vec3>& points, double cell);

  struct Nearest {
    std::size_t index = 0;
    double distance = 0.0;
  };

  Nearest nearest(const Vec3& q) const;
  bool any_within(const Vec3& q, double radius) const;

  double cell() const { return cell_; }
  std::size_t size() const { return points_->size(); }

 private:
  using Key = std::array<std::int64_t, 3>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  Key key_of(const Vec3& p) const;
  Nearest linear_scan(const Vec3& q) const;

  const std::vector<Vec3>* points_;
  double cell_;
  Key lo_{};
  Key hi_{};
  std::unordered_map<Key, std::vector<std::uint32_t>, KeyHash> cells_;
};

}  // namespace semmap
