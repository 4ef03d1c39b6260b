#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "satgeo/point_cloud.h"
#include "satgeo/raster.h"

namespace satgeo {

// A cloud point associated with a DSM cell, with its planimetric distance
// to the cell center.
struct NeighborPoint {
  WeightedPoint point;
  double distance = 0.0;
  std::size_t index = 0;  // position in the source cloud
};

using CellNeighbors = std::vector<NeighborPoint>;

// Bucketed index of one cloud over a grid, for radius queries at cell
// centers. Read-only after construction and safe to share across threads.
class CloudIndex {
 public:
  CloudIndex(const StereoCloud& cloud, const GridSpec& grid, double radius);

  // The <= k_max nearest points with distance <= radius of (x, y), ordered
  // by (distance, cloud index).
  void query(double x, double y, int k_max, CellNeighbors& out) const;

 private:
  const StereoCloud* cloud_;
  double radius_;
  double bx0_, by0_, bucket_;
  int nbx_, nby_;
  std::vector<std::uint32_t> start_;
  std::vector<std::uint32_t> members_;
};

// Per-cell neighbor sets in GridSpec::index order. Throws kDomain for
// radius <= 0 or k_max < 1.
std::vector<CellNeighbors> bin_points(const StereoCloud& cloud, const GridSpec& grid, double radius,
                                      int k_max);

struct BinElevation {
  double z = 0.0;
  double pbar = 0.0;
};

// Inverse-distance weights w = p / max(d, distance_floor) for both the
// elevation and the interpolated probability. Requires a nonempty set.
BinElevation bin_elevation(std::span<const NeighborPoint> neighbors, double distance_floor);

// sum p d^2 / sum p.
double horizontal_variance(std::span<const NeighborPoint> neighbors);

// One stereo pair's contribution to a cell.
struct PairEstimate {
  double z = 0.0;
  double pbar = 0.0;
  double sigma_h2 = 0.0;
};

// sum pbar sigma_h2 / sum pbar, or nullopt when every pbar is zero.
std::optional<double> fuse_horizontal(std::span<const PairEstimate> pairs);

struct ElevationSample {
  double z = 0.0;
  double p = 0.0;
};

struct ConsensusResult {
  double z = 0.0;
  double sigma_z = 0.0;
  double expected_count = 0.0;   // sum of p over the members
  std::vector<int> members;      // input indices, ascending
};

// Every value is tried as a seed; its set holds the values with
// |z - z_seed| < tol. The set with the largest sum of p wins; ties go to the
// smaller sigma_z, then to the seed that sorts first by (z, p). Requires a
// nonempty input and tol > 0.
ConsensusResult consensus_fuse(std::span<const ElevationSample> values, double tol);

struct FusionOptions {
  double radius = 0.0;     // 0 selects the grid spacing
  int k_max = 16;
  double tolerance = 0.5;  // m
  int min_pairs = 3;       // fewer consensus members flags the cell
  int threads = 1;
  bool median = false;
};

struct DsmGrid {
  GridSpec spec;
  Raster z;
  Raster sigma_z;
  Raster sigma_h;
  Raster pbar;                        // mean pbar of the consensus members
  std::vector<std::uint8_t> low_confidence;
  std::vector<int> pair_count;        // pairs contributing to each cell
  std::optional<Raster> median_z;     // comparison layer
};

// Bins each cloud separately, then per cell: consensus fusion of the pair
// elevations for z and sigma_z and probability-weighted fusion of the pair
// horizontal variances for sigma_h. Output is independent of `threads`.
DsmGrid fuse_dsm(std::span<const StereoCloud> clouds, const GridSpec& grid,
                 const FusionOptions& options = {});

}  // namespace satgeo
