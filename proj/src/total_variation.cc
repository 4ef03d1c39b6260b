#include "satgeo/total_variation.h"

#include <algorithm>

#include "satgeo/error.h"

namespace satgeo {

std::vector<double> tv_gradient(const DisparityGrid& grid) {
  std::vector<double> g(grid.d.size(), std::numeric_limits<double>::quiet_NaN());
  for (int j = 0; j < grid.height; ++j) {
    for (int i = 0; i < grid.width; ++i) {
      if (!grid.valid(i, j)) continue;
      const double c = grid.at(i, j);
      const int ip = std::min(i + 1, grid.width - 1);
      const int jp = std::min(j + 1, grid.height - 1);
      const double di = grid.valid(ip, j) ? std::abs(grid.at(ip, j) - c) : 0.0;
      const double dj = grid.valid(i, jp) ? std::abs(grid.at(i, jp) - c) : 0.0;
      g[static_cast<std::size_t>(j) * grid.width + i] = std::sqrt(di + dj);
    }
  }
  return g;
}

ClassGrid tv_class(const DisparityGrid& grid, double theta, int n_max) {
  if (!(theta > 0.0)) throw Error(ErrorKind::kDomain, "TV threshold must be positive");
  if (n_max < 1) throw Error(ErrorKind::kDomain, "TV ring count must be at least 1");
  if (grid.width <= 0 || grid.height <= 0 || grid.d.size() != static_cast<std::size_t>(grid.width) * grid.height) {
    throw Error(ErrorKind::kDomain, "disparity grid size mismatch");
  }
  const std::vector<double> g = tv_gradient(grid);
  auto g_at = [&](int i, int j) {
    i = std::clamp(i, 0, grid.width - 1);
    j = std::clamp(j, 0, grid.height - 1);
    return g[static_cast<std::size_t>(j) * grid.width + i];
  };

  ClassGrid out{grid.width, grid.height, std::vector<int>(grid.d.size(), kInvalidClass)};
  for (int j = 0; j < grid.height; ++j) {
    for (int i = 0; i < grid.width; ++i) {
      if (!grid.valid(i, j)) continue;
      double cumulative = 0.0;
      int cls = 0;
      for (int m = 1; m <= n_max; ++m) {
        double sum = 0.0;
        int count = 0;
        auto add = [&](int a, int b) {
          const double v = g_at(i + a, j + b);
          if (!std::isnan(v)) {
            sum += v;
            ++count;
          }
        };
        for (int a = -m; a < m; ++a) {
          add(a, -m);   // top edge
          add(m, a);    // right edge
          add(-a, m);   // bottom edge
          add(-m, -a);  // left edge
        }
        if (count > 0) cumulative += sum / count;
        if (cumulative >= theta) break;
        cls = m;
      }
      out.classes[static_cast<std::size_t>(j) * grid.width + i] = cls;
    }
  }
  return out;
}

void TvCalibration::validate() const {
  if (classes.empty() || classes.size() != sigma.size()) {
    throw Error(ErrorKind::kConfig, "TV calibration needs matching, nonempty class and sigma lists");
  }
  for (std::size_t k = 1; k < classes.size(); ++k) {
    if (!(classes[k] > classes[k - 1])) throw Error(ErrorKind::kConfig, "TV calibration classes must increase strictly");
    if (!(sigma[k] < sigma[k - 1])) throw Error(ErrorKind::kConfig, "TV calibration sigmas must decrease strictly");
  }
}

double tv_to_sigma(double cls, const TvCalibration& cal) {
  cal.validate();
  if (cls <= cal.classes.front()) return cal.sigma.front();
  if (cls >= cal.classes.back()) return cal.sigma.back();
  const auto hi = static_cast<std::size_t>(
      std::upper_bound(cal.classes.begin(), cal.classes.end(), cls) - cal.classes.begin());
  const std::size_t lo = hi - 1;
  if (cls == cal.classes[lo]) return cal.sigma[lo];
  const double t = (cls - cal.classes[lo]) / (cal.classes[hi] - cal.classes[lo]);
  return cal.sigma[lo] + t * (cal.sigma[hi] - cal.sigma[lo]);
}

std::vector<double> tv_to_sigma(const ClassGrid& classes, const TvCalibration& cal) {
  cal.validate();
  std::vector<double> out(classes.classes.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (classes.classes[k] != kInvalidClass) out[k] = tv_to_sigma(classes.classes[k], cal);
  }
  return out;
}

}  // namespace satgeo
