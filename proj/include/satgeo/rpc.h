#pragma once

#include <array>

#include "json.hpp"

#include "satgeo/geodesy.h"

namespace satgeo {

// Image coordinates. `sample` is the column, `line` the row; affine cameras
// use u = sample, v = line.
struct PixelCoord {
  double line = 0.0;
  double sample = 0.0;
};

// Rational polynomial camera in the conventional 20-term cubic layout (the
// RPC00B ordering, with L = normalized longitude, P = normalized latitude,
// H = normalized height):
//
//   1, L, P, H, LP, LH, PH, L^2, P^2, H^2,
//   PLH, L^3, LP^2, LH^2, L^2P, P^3, PH^2, L^2H, P^2H, H^3
//
// Normalization offsets/scales for lon/lat are in degrees.
struct RpcModel {
  using Coeffs = std::array<double, 20>;

  Coeffs line_num{};
  Coeffs line_den{};
  Coeffs samp_num{};
  Coeffs samp_den{};

  double lon_off = 0.0, lon_scale = 1.0;
  double lat_off = 0.0, lat_scale = 1.0;
  double h_off = 0.0, h_scale = 1.0;
  double line_off = 0.0, line_scale = 1.0;
  double samp_off = 0.0, samp_scale = 1.0;

  // Throws kDomain if a scale is non-positive or a denominator constant is 0.
  void validate() const;

  // Normalized (L, P, H) for a geodetic point.
  Vec3 normalize(const GeodeticPoint& p) const;

  // True when every normalized coordinate lies in [-1.5, 1.5].
  bool in_validity_window(const GeodeticPoint& p) const;

  static Coeffs terms(const Vec3& normalized);
};

// Forward projection. Throws kProjectionSingular when a denominator has
// magnitude below 1e-12.
PixelCoord rpc_project(const RpcModel& model, const GeodeticPoint& p);

void to_json(nlohmann::json& j, const RpcModel& m);
void from_json(const nlohmann::json& j, RpcModel& m);

}  // namespace satgeo
