#include "satgeo/evaluation.h"

#include <algorithm>
#include <cmath>

#include "satgeo/error.h"

namespace satgeo {

namespace {

void require_same_grid(const Raster& a, const Raster& b) {
  if (!(a.spec == b.spec) || a.values.size() != b.values.size()) {
    throw Error(ErrorKind::kDomain, "rasters are not co-registered");
  }
}

}  // namespace

double normalized_distance(double z, double gt, double sigma) {
  const double err = std::abs(z - gt);
  if (sigma > 0.0) return err / sigma;
  return err <= kZeroSigmaTolerance ? 0.0 : kInfiniteDistance;
}

Raster normalized_distance(const Raster& z, const Raster& sigma_z, const Raster& gt) {
  require_same_grid(z, sigma_z);
  require_same_grid(z, gt);
  Raster out(z.spec);
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    if (std::isnan(z.values[k]) || std::isnan(sigma_z.values[k]) || std::isnan(gt.values[k])) continue;
    out.values[k] = normalized_distance(z.values[k], gt.values[k], sigma_z.values[k]);
  }
  return out;
}

NdistSummary summarize(const Raster& ndist) {
  NdistSummary s;
  for (double v : ndist.values) {
    if (std::isnan(v)) continue;
    ++s.valid;
    if (v <= 1.0) ++s.within_1;
    if (v <= kLe90Factor) ++s.within_le90;
  }
  if (s.valid) {
    s.fraction_within_1 = static_cast<double>(s.within_1) / s.valid;
    s.fraction_within_le90 = static_cast<double>(s.within_le90) / s.valid;
  }
  return s;
}

double h90_radius(double sigma_h, double s_gt) {
  if (!(sigma_h >= 0.0) || !(s_gt > 0.0)) throw Error(ErrorKind::kDomain, "h90_radius needs sigma_h >= 0 and s_gt > 0");
  return kCe90Factor * sigma_h + s_gt / std::sqrt(2.0);
}

Raster h90_radius(const Raster& sigma_h, double s_gt) {
  Raster out(sigma_h.spec);
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    if (!std::isnan(sigma_h.values[k])) out.values[k] = h90_radius(sigma_h.values[k], s_gt);
  }
  return out;
}

Raster neighborhood_normalized_distance(const Raster& z, const Raster& sigma_z, const Raster& gt,
                                        const Raster& radius) {
  require_same_grid(z, sigma_z);
  require_same_grid(z, gt);
  require_same_grid(z, radius);
  const GridSpec& g = z.spec;
  Raster out(g);
  for (int row = 0; row < g.height; ++row) {
    for (int col = 0; col < g.width; ++col) {
      const auto k = g.index(col, row);
      const double zc = z.values[k];
      const double r = radius.values[k];
      if (std::isnan(zc) || std::isnan(sigma_z.values[k]) || std::isnan(r)) continue;
      const int reach = static_cast<int>(std::floor(r / g.spacing));
      double best = std::numeric_limits<double>::quiet_NaN();
      double best_err = std::numeric_limits<double>::infinity();
      for (int dr = -reach; dr <= reach; ++dr) {
        for (int dc = -reach; dc <= reach; ++dc) {
          const int c = col + dc, rr = row + dr;
          if (c < 0 || rr < 0 || c >= g.width || rr >= g.height) continue;
          if (std::hypot(dc, dr) * g.spacing > r) continue;
          const double v = gt.at(c, rr);
          if (std::isnan(v)) continue;
          const double err = std::abs(zc - v);
          if (err < best_err) {
            best_err = err;
            best = v;
          }
        }
      }
      if (!std::isnan(best)) out.values[k] = normalized_distance(zc, best, sigma_z.values[k]);
    }
  }
  return out;
}

}  // namespace satgeo
