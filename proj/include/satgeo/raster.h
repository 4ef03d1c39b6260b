#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "satgeo/geodesy.h"
#include "satgeo/provenance.h"

namespace satgeo {

// North-up grid. (x0, y0) is the top-left corner; row 0 is the northmost
// row, so cell (col, row) is centered at (x0 + (col+.5)s, y0 - (row+.5)s).
struct GridSpec {
  double x0 = 0.0;
  double y0 = 0.0;
  double spacing = 1.0;
  int width = 0;
  int height = 0;

  // Throws kDomain for a non-positive spacing or size.
  void validate() const;

  std::size_t size() const { return static_cast<std::size_t>(width) * height; }
  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(row) * width + col;
  }
  Vec2 cell_center(int col, int row) const {
    return {x0 + (col + 0.5) * spacing, y0 - (row + 0.5) * spacing};
  }
  // Grid covering [xmin, xmax] x [ymin, ymax] with whole cells.
  static GridSpec covering(double xmin, double ymin, double xmax, double ymax, double spacing);

  bool operator==(const GridSpec&) const = default;
};

enum class Layer {
  kZ,
  kSigmaZ,
  kSigmaH,
  kPbar,
  kNdist,
  kTvClass,
  kSigmaDisp,
  kDisparity,
  kMedianZ,
  kGroundTruth,
};

std::string to_string(Layer layer);
Layer layer_from_string(const std::string& name);

// Cell values with NaN marking invalid cells.
struct Raster {
  GridSpec spec;
  std::vector<double> values;

  Raster() = default;
  explicit Raster(const GridSpec& s, double fill = std::numeric_limits<double>::quiet_NaN())
      : spec(s), values(s.size(), fill) {}

  double& at(int col, int row) { return values[spec.index(col, row)]; }
  double at(int col, int row) const { return values[spec.index(col, row)]; }
  bool valid(int col, int row) const { return !std::isnan(at(col, row)); }
  std::size_t valid_count() const;
};

inline constexpr double kNoData = -9999.0;

// `base` names the pair <base>.f32 (row-major little-endian float32, NaN
// written as kNoData) and <base>.json (sidecar with origin_xy, spacing,
// width, height, nodata, layer, provenance).
void write_raster(const std::filesystem::path& base, const Raster& raster, Layer layer,
                  const Provenance& provenance);

struct LoadedRaster {
  Raster raster;
  Layer layer;
  std::optional<Provenance> provenance;
};

// Throws kIo for missing or short files, kConfig for a malformed sidecar.
LoadedRaster read_raster(const std::filesystem::path& base);

// ESRI ASCII grid for GIS viewers.
void write_ascii_grid(const std::filesystem::path& path, const Raster& raster);

}  // namespace satgeo
