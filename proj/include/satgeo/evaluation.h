#pragma once

#include <cstddef>
#include <limits>

#include "satgeo/raster.h"

namespace satgeo {

inline constexpr double kLe90Factor = 1.644;  // linear 90% bound, in sigma
inline constexpr double kCe90Factor = 2.146;  // circular 90% bound, in sigma
inline constexpr double kZeroSigmaTolerance = 1e-3;  // m
inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();

// |z - gt| / sigma. For sigma == 0 the result is 0 when |z - gt| is within
// kZeroSigmaTolerance and kInfiniteDistance otherwise.
double normalized_distance(double z, double gt, double sigma);

// Per valid cell of `z`, `sigma_z` and `gt`; NaN elsewhere. Throws kDomain
// unless the three grids share one GridSpec.
Raster normalized_distance(const Raster& z, const Raster& sigma_z, const Raster& gt);

struct NdistSummary {
  std::size_t valid = 0;
  std::size_t within_1 = 0;
  std::size_t within_le90 = 0;
  double fraction_within_1 = 0.0;
  double fraction_within_le90 = 0.0;
};

NdistSummary summarize(const Raster& ndist);

// 2.146 sigma_h + s_gt / sqrt(2). Throws kDomain for sigma_h < 0 or s_gt <= 0.
double h90_radius(double sigma_h, double s_gt);
Raster h90_radius(const Raster& sigma_h, double s_gt);

// As normalized_distance, but each cell is compared with the valid ground
// truth cell within radius(cell) of its center that is closest in
// elevation. Cells with no such ground truth are NaN.
Raster neighborhood_normalized_distance(const Raster& z, const Raster& sigma_z, const Raster& gt,
                                        const Raster& radius);

}  // namespace satgeo
