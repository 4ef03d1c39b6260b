#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace satgeo {

// Disparity image in pixels; NaN marks invalid samples.
struct DisparityGrid {
  int width = 0;
  int height = 0;
  std::vector<double> d;

  DisparityGrid() = default;
  DisparityGrid(int w, int h, double fill = 0.0)
      : width(w), height(h), d(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int i, int j) { return d[static_cast<std::size_t>(j) * width + i]; }
  double at(int i, int j) const { return d[static_cast<std::size_t>(j) * width + i]; }
  bool valid(int i, int j) const { return std::isfinite(at(i, j)); }
};

inline constexpr int kInvalidClass = -1;

struct ClassGrid {
  int width = 0;
  int height = 0;
  std::vector<int> classes;  // kInvalidClass where the disparity is invalid

  int at(int i, int j) const { return classes[static_cast<std::size_t>(j) * width + i]; }
};

// Local roughness sqrt(|d(i+1,j) - d(i,j)| + |d(i,j+1) - d(i,j)|) with
// forward differences clamped at the border. An invalid neighbor contributes
// a zero difference; an invalid pixel yields NaN.
std::vector<double> tv_gradient(const DisparityGrid& grid);

// Per pixel, the largest n <= n_max such that the cumulative ring mean
// sum_{m=1..n} mean_{ring m} g stays below theta, or 0 if ring 1 alone
// reaches it. Ring m holds the 8m pixels at Chebyshev distance m, with
// coordinates clamped into the grid; invalid members are dropped and the
// mean taken over the rest. Throws kDomain for theta <= 0 or n_max < 1.
ClassGrid tv_class(const DisparityGrid& grid, double theta, int n_max);

// Monotone table class -> disparity standard deviation.
struct TvCalibration {
  std::vector<double> classes;  // strictly increasing
  std::vector<double> sigma;    // strictly decreasing, px

  // Throws kConfig if empty, mismatched or not strictly monotone.
  void validate() const;
};

// Piecewise-linear in class, clamped to the end values.
double tv_to_sigma(double cls, const TvCalibration& calibration);

// NaN for invalid classes.
std::vector<double> tv_to_sigma(const ClassGrid& classes, const TvCalibration& calibration);

}  // namespace satgeo
