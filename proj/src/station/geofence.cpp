#include "station/geofence.hpp"

#include "core/errors.hpp"

namespace gmp3 {

GeoFence::GeoFence(const Vec3& min, const Vec3& max) : min_(min), max_(max) {
  if (!min.allFinite() || !max.allFinite() || !(min.array() < max.array()).all()) {
    throw InvalidArgument("geofence needs finite corners with min < max on every axis");
  }
}

bool GeoFence::contains(const Vec3& p) const {
  return p.allFinite() && (p.array() >= min_.array()).all() && (p.array() <= max_.array()).all();
}

}  // namespace gmp3
