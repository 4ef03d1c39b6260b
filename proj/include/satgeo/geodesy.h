#pragma once

#include <numbers>

#include <Eigen/Core>

namespace satgeo {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// WGS84 radii plus the mean spherical radius used for the orbit sphere.
struct EllipsoidConstants {
  static constexpr double kMajorRadius = 6378137.0;
  static constexpr double kMinorRadius = 6356752.31424518;
  static constexpr double kMeanRadius = 6371000.0;

  static constexpr double eccentricity_squared() {
    return 1.0 - (kMinorRadius * kMinorRadius) / (kMajorRadius * kMajorRadius);
  }
};

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// Angles are held in radians. Degrees appear only at I/O boundaries via
// from_degrees()/lon_deg()/lat_deg().
struct GeodeticPoint {
  double lon = 0.0;  // rad
  double lat = 0.0;  // rad
  double h = 0.0;    // m above ellipsoid

  static GeodeticPoint from_degrees(double lon_deg, double lat_deg, double h_m);
  double lon_deg() const { return rad_to_deg(lon); }
  double lat_deg() const { return rad_to_deg(lat); }
};

// Throws ErrorKind::kDomain if lon/lat are outside their ranges.
void validate(const GeodeticPoint& p);

Vec3 geodetic_to_ecf(const GeodeticPoint& p);

// Iterative latitude refinement (at most 10 iterations, 1e-12 rad).
// On the polar axis longitude is not observable; `lon_hint` is returned.
// Throws kDomain for |v| < b/2.
GeodeticPoint ecf_to_geodetic(const Vec3& v, double lon_hint = 0.0);

// Columns are the East, North, Up unit vectors at `origin`, in ecf.
Mat3 enu_to_ecf_rotation(const GeodeticPoint& origin);

// Meridian and prime-vertical radii of curvature at latitude `lat` (rad).
double meridian_radius(double lat);
double prime_vertical_radius(double lat);

// Local Cartesian frame anchored at a geodetic origin.
//
// kTangent is the rigorous East-North-Up frame: ecf offsets rotated by
// enu_to_ecf_rotation(origin)^T. kLinearized is its first-order expansion in
// (lon, lat, h) about the origin, i.e. x = (N+h0)cos(lat0)*dlon,
// y = (M+h0)*dlat, z = dh. The two agree to first order at the origin; the
// linearized frame is affine in geodetic coordinates, which makes an RPC that
// is affine in lon/lat/h exactly affine in local meters.
class LocalFrame {
 public:
  enum class Kind { kTangent, kLinearized };

  explicit LocalFrame(const GeodeticPoint& origin, Kind kind = Kind::kTangent);

  const GeodeticPoint& origin() const { return origin_; }
  Kind kind() const { return kind_; }
  const Mat3& enu_to_ecf() const { return enu_to_ecf_; }
  const Vec3& origin_ecf() const { return origin_ecf_; }

  Vec3 to_local(const GeodeticPoint& p) const;
  GeodeticPoint to_geodetic(const Vec3& local) const;

 private:
  GeodeticPoint origin_;
  Kind kind_;
  Mat3 enu_to_ecf_;
  Vec3 origin_ecf_;
  double east_scale_ = 0.0;   // m / rad of longitude
  double north_scale_ = 0.0;  // m / rad of latitude
};

}  // namespace satgeo
