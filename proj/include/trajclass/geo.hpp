#pragma once

#include <cmath>
#include <numbers>

namespace trajclass {

inline constexpr double kEarthRadiusMeters = 6371000.0;

/// Great-circle distance in meters between two (lat, lon) pairs in degrees.
template <typename Scalar>
Scalar haversine(Scalar lat1, Scalar lon1, Scalar lat2, Scalar lon2) {
  using std::asin;
  using std::cos;
  using std::sin;
  using std::sqrt;
  const Scalar deg = std::numbers::pi_v<Scalar> / Scalar(180);
  const Scalar phi1 = lat1 * deg;
  const Scalar phi2 = lat2 * deg;
  const Scalar sdphi = sin((phi2 - phi1) / Scalar(2));
  const Scalar sdlambda = sin((lon2 - lon1) * deg / Scalar(2));
  Scalar h = sdphi * sdphi + cos(phi1) * cos(phi2) * sdlambda * sdlambda;
  if (h > Scalar(1)) h = Scalar(1);
  return Scalar(2) * Scalar(kEarthRadiusMeters) * asin(sqrt(h));
}

// Local tangent plane around a reference point: x east, y north, meters.
struct LocalTangent {
  double ref_lat{52.0};
  double ref_lon{4.0};

  [[nodiscard]] double meters_per_deg_lat() const noexcept {
    return kEarthRadiusMeters * std::numbers::pi / 180.0;
  }
  [[nodiscard]] double meters_per_deg_lon() const noexcept {
    return kEarthRadiusMeters * std::cos(ref_lat * std::numbers::pi / 180.0) * std::numbers::pi /
           180.0;
  }
  [[nodiscard]] double lat_of(double north) const noexcept {
    return ref_lat + north / meters_per_deg_lat();
  }
  [[nodiscard]] double lon_of(double east) const noexcept {
    return ref_lon + east / meters_per_deg_lon();
  }
};

}  // namespace trajclass
