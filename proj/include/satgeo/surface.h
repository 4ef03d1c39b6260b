#pragma once

#include <memory>
#include <vector>

#include "json.hpp"

namespace satgeo {

// Parametric height field z(x, y) used as synthetic ground truth.
class Surface {
 public:
  virtual ~Surface() = default;
  virtual double height(double x, double y) const = 0;
  // Planimetric distance to the nearest height discontinuity (infinity if
  // the surface is continuous).
  virtual double discontinuity_distance(double x, double y) const = 0;
  virtual nlohmann::json to_json() const = 0;
};

using SurfacePtr = std::shared_ptr<const Surface>;

// z = z0 + gx x + gy y
SurfacePtr make_plane(double z0, double gx = 0.0, double gy = 0.0);
// `low` for x < edge_x, `high` otherwise.
SurfacePtr make_step(double edge_x, double low, double high);
// Flat-roofed block over [x0, x1] x [y0, y1] on ground level `base`.
SurfacePtr make_box(double x0, double x1, double y0, double y1, double base, double top);
// Gable roof with its ridge along y at the box center; `eave` and `ridge`
// are heights above the ground level `base`.
SurfacePtr make_gable(double x0, double x1, double y0, double y1, double base, double eave,
                      double ridge);
// Pointwise maximum of the parts.
SurfacePtr make_composite(std::vector<SurfacePtr> parts);

// Accepts the objects produced by Surface::to_json. Throws kConfig.
SurfacePtr surface_from_json(const nlohmann::json& j);

}  // namespace satgeo
