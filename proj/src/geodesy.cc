#include "satgeo/geodesy.h"

#include <cmath>
#include <sstream>

#include "satgeo/error.h"

namespace satgeo {
namespace {

constexpr double kA = EllipsoidConstants::kMajorRadius;
constexpr double kB = EllipsoidConstants::kMinorRadius;
constexpr double kE2 = EllipsoidConstants::eccentricity_squared();

constexpr int kMaxLatitudeIterations = 10;
constexpr double kLatitudeTolerance = 1e-12;

double wrap_pi(double angle) {
  return std::remainder(angle, 2.0 * std::numbers::pi);
}

}  // namespace

GeodeticPoint GeodeticPoint::from_degrees(double lon_deg, double lat_deg, double h_m) {
  return {deg_to_rad(lon_deg), deg_to_rad(lat_deg), h_m};
}

void validate(const GeodeticPoint& p) {
  constexpr double kSlack = 1e-12;
  if (!(std::abs(p.lon) <= std::numbers::pi + kSlack) ||
      !(std::abs(p.lat) <= std::numbers::pi / 2 + kSlack) || !std::isfinite(p.h)) {
    std::ostringstream msg;
    msg << "geodetic point out of range: lon=" << p.lon_deg() << " lat=" << p.lat_deg()
        << " h=" << p.h;
    throw Error(ErrorKind::kDomain, msg.str());
  }
}

double prime_vertical_radius(double lat) {
  const double s = std::sin(lat);
  return kA / std::sqrt(1.0 - kE2 * s * s);
}

double meridian_radius(double lat) {
  const double s = std::sin(lat);
  const double w = 1.0 - kE2 * s * s;
  return kA * (1.0 - kE2) / (w * std::sqrt(w));
}

Vec3 geodetic_to_ecf(const GeodeticPoint& p) {
  const double n = prime_vertical_radius(p.lat);
  const double cos_lat = std::cos(p.lat);
  const double sin_lat = std::sin(p.lat);
  return {(n + p.h) * cos_lat * std::cos(p.lon),
          (n + p.h) * cos_lat * std::sin(p.lon),
          ((kB * kB) / (kA * kA) * n + p.h) * sin_lat};
}

GeodeticPoint ecf_to_geodetic(const Vec3& v, double lon_hint) {
  if (!v.allFinite() || v.norm() < kB / 2) {
    throw Error(ErrorKind::kDomain, "ecf_to_geodetic: point too close to the Earth center");
  }
  const double p = std::hypot(v.x(), v.y());
  GeodeticPoint out;
  // Exactly on the polar axis the longitude is a convention.
  out.lon = p == 0.0 ? lon_hint : std::atan2(v.y(), v.x());

  double lat = std::atan2(v.z(), p * (1.0 - kE2));
  double h = 0.0;
  for (int iter = 0; iter < kMaxLatitudeIterations; ++iter) {
    const double n = prime_vertical_radius(lat);
    const double cos_lat = std::cos(lat);
    const double sin_lat = std::sin(lat);
    // Use whichever height form is better conditioned.
    if (std::abs(cos_lat) > std::abs(sin_lat)) {
      h = p / cos_lat - n;
    } else {
      h = v.z() / sin_lat - n * (1.0 - kE2);
    }
    const double next = std::atan2(v.z(), p * (1.0 - kE2 * n / (n + h)));
    const bool done = std::abs(next - lat) < kLatitudeTolerance;
    lat = next;
    if (done) break;
  }
  const double n = prime_vertical_radius(lat);
  const double cos_lat = std::cos(lat);
  const double sin_lat = std::sin(lat);
  h = std::abs(cos_lat) > std::abs(sin_lat) ? p / cos_lat - n
                                            : v.z() / sin_lat - n * (1.0 - kE2);
  out.lat = lat;
  out.h = h;
  return out;
}

Mat3 enu_to_ecf_rotation(const GeodeticPoint& origin) {
  const double sl = std::sin(origin.lon), cl = std::cos(origin.lon);
  const double sp = std::sin(origin.lat), cp = std::cos(origin.lat);
  Mat3 t;
  t << -sl, -sp * cl, cp * cl,
        cl, -sp * sl, cp * sl,
       0.0,       cp,      sp;
  return t;
}

LocalFrame::LocalFrame(const GeodeticPoint& origin, Kind kind)
    : origin_(origin), kind_(kind) {
  validate(origin);
  enu_to_ecf_ = enu_to_ecf_rotation(origin);
  origin_ecf_ = geodetic_to_ecf(origin);
  east_scale_ = (prime_vertical_radius(origin.lat) + origin.h) * std::cos(origin.lat);
  north_scale_ = meridian_radius(origin.lat) + origin.h;
}

Vec3 LocalFrame::to_local(const GeodeticPoint& p) const {
  if (kind_ == Kind::kTangent) {
    return enu_to_ecf_.transpose() * (geodetic_to_ecf(p) - origin_ecf_);
  }
  return {east_scale_ * wrap_pi(p.lon - origin_.lon), north_scale_ * (p.lat - origin_.lat),
          p.h - origin_.h};
}

GeodeticPoint LocalFrame::to_geodetic(const Vec3& local) const {
  if (kind_ == Kind::kTangent) {
    return ecf_to_geodetic(origin_ecf_ + enu_to_ecf_ * local, origin_.lon);
  }
  if (east_scale_ == 0.0) {
    throw Error(ErrorKind::kFrame, "linearized frame is singular at the poles");
  }
  return {wrap_pi(origin_.lon + local.x() / east_scale_), origin_.lat + local.y() / north_scale_,
          origin_.h + local.z()};
}

}  // namespace satgeo
