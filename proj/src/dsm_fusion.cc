#include "satgeo/dsm_fusion.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "satgeo/error.h"

namespace satgeo {

CloudIndex::CloudIndex(const StereoCloud& cloud, const GridSpec& grid, double radius)
    : cloud_(&cloud), radius_(radius) {
  if (!(radius > 0.0)) throw Error(ErrorKind::kDomain, "binning radius must be positive");
  grid.validate();
  bucket_ = std::max(radius, grid.spacing);
  bx0_ = grid.x0 - radius;
  by0_ = grid.y0 - grid.height * grid.spacing - radius;
  nbx_ = static_cast<int>(std::ceil((grid.width * grid.spacing + 2 * radius) / bucket_)) + 1;
  nby_ = static_cast<int>(std::ceil((grid.height * grid.spacing + 2 * radius) / bucket_)) + 1;

  const auto n_buckets = static_cast<std::size_t>(nbx_) * nby_;
  std::vector<std::int64_t> slot(cloud.points.size(), -1);
  std::vector<std::uint32_t> counts(n_buckets + 1, 0);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const double fx = std::floor((cloud.points[i].x - bx0_) / bucket_);
    const double fy = std::floor((cloud.points[i].y - by0_) / bucket_);
    if (fx < 0 || fy < 0 || fx >= nbx_ || fy >= nby_) continue;
    slot[i] = static_cast<std::int64_t>(fy) * nbx_ + static_cast<std::int64_t>(fx);
    ++counts[slot[i] + 1];
  }
  std::partial_sum(counts.begin(), counts.end(), counts.begin());
  start_ = counts;
  members_.resize(counts.back());
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    if (slot[i] >= 0) members_[counts[slot[i]]++] = static_cast<std::uint32_t>(i);
  }
}

void CloudIndex::query(double x, double y, int k_max, CellNeighbors& out) const {
  out.clear();
  const int ix0 = std::max(0, static_cast<int>(std::floor((x - radius_ - bx0_) / bucket_)));
  const int ix1 = std::min(nbx_ - 1, static_cast<int>(std::floor((x + radius_ - bx0_) / bucket_)));
  const int iy0 = std::max(0, static_cast<int>(std::floor((y - radius_ - by0_) / bucket_)));
  const int iy1 = std::min(nby_ - 1, static_cast<int>(std::floor((y + radius_ - by0_) / bucket_)));
  for (int iy = iy0; iy <= iy1; ++iy) {
    for (int ix = ix0; ix <= ix1; ++ix) {
      const auto b = static_cast<std::size_t>(iy) * nbx_ + ix;
      for (auto m = start_[b]; m < start_[b + 1]; ++m) {
        const WeightedPoint& pt = cloud_->points[members_[m]];
        const double d = std::hypot(pt.x - x, pt.y - y);
        if (d <= radius_) out.push_back({pt, d, members_[m]});
      }
    }
  }
  auto closer = [](const NeighborPoint& a, const NeighborPoint& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  };
  if (static_cast<int>(out.size()) > k_max) {
    std::partial_sort(out.begin(), out.begin() + k_max, out.end(), closer);
    out.resize(k_max);
  } else {
    std::sort(out.begin(), out.end(), closer);
  }
}

std::vector<CellNeighbors> bin_points(const StereoCloud& cloud, const GridSpec& grid, double radius,
                                      int k_max) {
  if (k_max < 1) throw Error(ErrorKind::kDomain, "k_max must be at least 1");
  const CloudIndex index(cloud, grid, radius);
  std::vector<CellNeighbors> cells(grid.size());
  for (int row = 0; row < grid.height; ++row) {
    for (int col = 0; col < grid.width; ++col) {
      const Vec2 c = grid.cell_center(col, row);
      index.query(c.x(), c.y(), k_max, cells[grid.index(col, row)]);
    }
  }
  return cells;
}

BinElevation bin_elevation(std::span<const NeighborPoint> neighbors, double distance_floor) {
  if (neighbors.empty()) throw Error(ErrorKind::kDomain, "bin_elevation needs at least one point");
  double sw = 0.0, swz = 0.0, swp = 0.0;
  for (const auto& n : neighbors) {
    const double w = n.point.p / std::max(n.distance, distance_floor);
    sw += w;
    swz += w * n.point.z;
    swp += w * n.point.p;
  }
  return {swz / sw, swp / sw};
}

double horizontal_variance(std::span<const NeighborPoint> neighbors) {
  if (neighbors.empty()) throw Error(ErrorKind::kDomain, "horizontal_variance needs at least one point");
  double sp = 0.0, spd = 0.0;
  for (const auto& n : neighbors) {
    sp += n.point.p;
    spd += n.point.p * n.distance * n.distance;
  }
  return spd / sp;
}

std::optional<double> fuse_horizontal(std::span<const PairEstimate> pairs) {
  double sp = 0.0, spv = 0.0;
  for (const auto& q : pairs) {
    sp += q.pbar;
    spv += q.pbar * q.sigma_h2;
  }
  if (!(sp > 0.0)) return std::nullopt;
  return spv / sp;
}

ConsensusResult consensus_fuse(std::span<const ElevationSample> values, double tol) {
  if (values.empty()) throw Error(ErrorKind::kDomain, "consensus_fuse needs at least one value");
  if (!(tol > 0.0)) throw Error(ErrorKind::kDomain, "consensus tolerance must be positive");

  const int n = static_cast<int>(values.size());
  std::vector<int> seeds(n);
  std::iota(seeds.begin(), seeds.end(), 0);
  std::stable_sort(seeds.begin(), seeds.end(), [&](int a, int b) {
    return values[a].z < values[b].z || (values[a].z == values[b].z && values[a].p < values[b].p);
  });

  ConsensusResult best;
  bool have = false;
  std::vector<int> members;
  for (int seed : seeds) {
    members.clear();
    const double zs = values[seed].z;
    double sp = 0.0, spz = 0.0;
    for (int q = 0; q < n; ++q) {
      if (std::abs(values[q].z - zs) < tol) {
        members.push_back(q);
        sp += values[q].p;
        spz += values[q].p * values[q].z;
      }
    }
    const double mean = spz / sp;
    double spv = 0.0;
    for (int q : members) spv += values[q].p * (values[q].z - mean) * (values[q].z - mean);
    const double sigma = std::sqrt(spv / sp);
    if (!have || sp > best.expected_count || (sp == best.expected_count && sigma < best.sigma_z)) {
      best = {mean, sigma, sp, members};
      have = true;
    }
  }
  return best;
}

namespace {

double median_of(std::vector<double>& v) {
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  if (v.size() % 2) return v[mid];
  const double hi = v[mid];
  return 0.5 * (*std::max_element(v.begin(), v.begin() + mid) + hi);
}

}  // namespace

DsmGrid fuse_dsm(std::span<const StereoCloud> clouds, const GridSpec& grid, const FusionOptions& options) {
  grid.validate();
  if (clouds.empty()) throw Error(ErrorKind::kDomain, "fuse_dsm needs at least one cloud");
  if (options.k_max < 1) throw Error(ErrorKind::kDomain, "k_max must be at least 1");
  if (!(options.tolerance > 0.0)) throw Error(ErrorKind::kDomain, "consensus tolerance must be positive");
  const double radius = options.radius > 0.0 ? options.radius : grid.spacing;
  const double distance_floor = grid.spacing / 100.0;

  std::vector<CloudIndex> indices;
  indices.reserve(clouds.size());
  for (const auto& c : clouds) {
    c.validate();
    indices.emplace_back(c, grid, radius);
  }

  DsmGrid out;
  out.spec = grid;
  out.z = Raster(grid);
  out.sigma_z = Raster(grid);
  out.sigma_h = Raster(grid);
  out.pbar = Raster(grid);
  out.low_confidence.assign(grid.size(), 0);
  out.pair_count.assign(grid.size(), 0);
  if (options.median) out.median_z = Raster(grid);

  auto run_rows = [&](int row_begin, int row_end) {
    CellNeighbors neighbors;
    std::vector<PairEstimate> pairs;
    std::vector<ElevationSample> samples;
    std::vector<double> zs;
    for (int row = row_begin; row < row_end; ++row) {
      for (int col = 0; col < grid.width; ++col) {
        const Vec2 c = grid.cell_center(col, row);
        pairs.clear();
        for (const auto& index : indices) {
          index.query(c.x(), c.y(), options.k_max, neighbors);
          if (neighbors.empty()) continue;
          const BinElevation e = bin_elevation(neighbors, distance_floor);
          pairs.push_back({e.z, e.pbar, horizontal_variance(neighbors)});
        }
        const auto k = grid.index(col, row);
        out.pair_count[k] = static_cast<int>(pairs.size());
        if (pairs.empty()) continue;
        const auto sigma_h2 = fuse_horizontal(pairs);
        if (!sigma_h2) continue;

        samples.clear();
        for (const auto& q : pairs) samples.push_back({q.z, q.pbar});
        const ConsensusResult cr = consensus_fuse(samples, options.tolerance);
        out.z.values[k] = cr.z;
        out.sigma_z.values[k] = cr.sigma_z;
        out.sigma_h.values[k] = std::sqrt(*sigma_h2);
        out.pbar.values[k] = cr.expected_count / static_cast<double>(cr.members.size());
        out.low_confidence[k] = static_cast<int>(cr.members.size()) < options.min_pairs;
        if (out.median_z) {
          zs.clear();
          for (const auto& q : pairs) zs.push_back(q.z);
          out.median_z->values[k] = median_of(zs);
        }
      }
    }
  };

  const int threads = std::clamp(options.threads, 1, grid.height);
  if (threads == 1) {
    run_rows(0, grid.height);
  } else {
    std::vector<std::jthread> pool;
    const int chunk = (grid.height + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int b = t * chunk;
      const int e = std::min(grid.height, b + chunk);
      if (b < e) pool.emplace_back(run_rows, b, e);
    }
  }
  return out;
}

}  // namespace satgeo
