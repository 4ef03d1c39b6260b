#pragma once

#include <optional>

#include "satgeo/geodesy.h"

namespace satgeo {

// Nominal orbit height used for slant range when no pose is available.
inline constexpr double kDefaultAltitude = 620000.0;

// A sensor ray in a local Cartesian frame. `direction` points from the
// scene toward the sensor; (u_axis, v_axis, direction) is a right-handed
// orthonormal triad spanning the plane in which origin displacements are
// measured.
struct Ray {
  Vec3 direction = Vec3::UnitZ();
  Vec3 origin = Vec3::Zero();
  Vec3 u_axis = Vec3::UnitX();
  Vec3 v_axis = Vec3::UnitY();
  double slant_range = kDefaultAltitude;

  // Throws kGeometry unless the frame invariants hold to 1e-12.
  void validate() const;

  // Component of (origin - x) orthogonal to the ray, in (u, v) coordinates.
  Vec2 plane_offset(const Vec3& x) const;
  double perpendicular_distance(const Vec3& x) const;
};

// Sensor X/Y axes expressed in the ray's local frame, plus |R_s - R_o|.
struct SensorAxes {
  Vec3 x_axis;
  Vec3 y_axis;
  double slant_range = 0.0;
};

struct RayContext {
  std::optional<SensorAxes> sensor;
  double altitude = kDefaultAltitude;
};

// Builds a ray with a complete plane frame. With sensor axes the u/v axes are
// the sensor X/Y axes made orthogonal to `direction`; otherwise they follow a
// north-to-south scan completion: v = dir x (0,-1,0), u = v x dir (east
// reference when the ray is horizontal-north). Slant range falls back to
// altitude / sin(elevation).
Ray make_ray(const Vec3& direction, const Vec3& origin, const RayContext& context = {});

}  // namespace satgeo
