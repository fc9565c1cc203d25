#pragma once

#include "core/se3.hpp"

namespace gmp3 {

/// Closed axis-aligned flight volume.
class GeoFence {
 public:
  /// Throws InvalidArgument unless min < max on every axis.
  GeoFence(const Vec3& min, const Vec3& max);

  bool contains(const Vec3& p) const;
  const Vec3& min() const { return min_; }
  const Vec3& max() const { return max_; }

 private:
  Vec3 min_;
  Vec3 max_;
};

}  // namespace gmp3
