#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "oracles.h"
#include "satgeo/dsm_fusion.h"
#include "satgeo/ellipsoid.h"
#include "satgeo/error.h"
#include "satgeo/evaluation.h"
#include "satgeo/monte_carlo.h"
#include "satgeo/point_cloud.h"
#include "satgeo/raster.h"
#include "satgeo/synth.h"
#include "satgeo/total_variation.h"

using namespace satgeo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("satgeo_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Mat3 random_cov(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat3 a;
  for (int i = 0; i < 9; ++i) a(i) = g(rng);
  return a * a.transpose() + 0.1 * Mat3::Identity();
}

StereoCloud random_cloud(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> xy(-1.0, 11.0), z(0, 5), p(0.01, 1.0);
  StereoCloud c;
  c.pair_id = "pair_000";
  for (int i = 0; i < n; ++i) c.points.push_back({xy(rng), xy(rng), z(rng), p(rng)});
  return c;
}

}  // namespace

// ---- confidence ellipsoid ----

TEST(Ellipsoid, ChiSquareQuantileInvertsClosedFormCdf) {
  const double q = chi_square_quantile(0.9, 3);
  EXPECT_NEAR(oracle::chi2_3_cdf(q), 0.9, 1e-12);
  EXPECT_NEAR(q, 6.251388631170325, 1e-9);
  for (double p : {0.5, 0.68, 0.95, 0.99}) {
    EXPECT_NEAR(oracle::chi2_3_cdf(chi_square_quantile(p, 3)), p, 1e-12);
  }
  // One degree of freedom: the squared normal quantile.
  EXPECT_NEAR(chi_square_quantile(oracle::normal_within(1.644), 1), 1.644 * 1.644, 1e-9);
}

TEST(Ellipsoid, SemiAxesFromEigenDecomposition) {
  std::mt19937_64 rng(1);
  const double q = chi_square_quantile(0.9, 3);
  for (int i = 0; i < 50; ++i) {
    const Mat3 c = random_cov(rng);
    const ErrorEllipsoid e = error_ellipsoid(c, 0.9, Vec3(1, 2, 3));
    const Eigen::SelfAdjointEigenSolver<Mat3> eig(c);
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(e.semi_axes[k], std::sqrt(q * eig.eigenvalues()[2 - k]), 1e-10);
      // Points on the surface sit at Mahalanobis radius^2 == q.
      const Vec3 surface = e.center + e.semi_axes[k] * e.orientation.col(k);
      EXPECT_NEAR(mahalanobis_squared(c, e.center, surface), q, 1e-8);
    }
    EXPECT_GE(e.semi_axes[0], e.semi_axes[1]);
    EXPECT_GE(e.semi_axes[1], e.semi_axes[2]);
    EXPECT_NEAR(e.orientation.determinant(), 1.0, 1e-12);
  }
  const Mat3 d = Vec3(4.0, 1.0, 9.0).asDiagonal();
  const ErrorEllipsoid e = error_ellipsoid(d, 0.9);
  EXPECT_NEAR(e.semi_axes[0], 3.0 * std::sqrt(q), 1e-12);
  EXPECT_NEAR(std::abs(e.orientation(2, 0)), 1.0, 1e-12);
}

TEST(Ellipsoid, DegenerateAndInvalidInputs) {
  const ErrorEllipsoid zero = error_ellipsoid(Mat3::Zero(), 0.9);
  EXPECT_EQ(zero.semi_axes, Vec3::Zero());
  Mat3 neg = Mat3::Identity();
  neg(2, 2) = -0.5;
  try {
    error_ellipsoid(neg, 0.9);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCovariance);
  }
  EXPECT_THROW(error_ellipsoid(Mat3::Identity(), 1.0), Error);
  EXPECT_THROW(error_ellipsoid(Mat3::Identity(), 0.0), Error);
}

// ---- Monte Carlo ----

TEST(MonteCarlo, SymmetricFactorReproducesCovariance) {
  std::mt19937_64 rng(2);
  const Mat3 c = random_cov(rng);
  const Eigen::MatrixXd l = symmetric_factor(c);
  EXPECT_LT((l * l.transpose() - c).norm(), 1e-12 * c.norm());
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(2, 2);
  bad(0, 0) = -1.0;
  EXPECT_THROW(symmetric_factor(bad), Error);
}

TEST(MonteCarlo, SampleCovarianceMatchesTwoPassFormula) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(1e5, 2.0);
  std::vector<Vec3> pts;
  for (int i = 0; i < 1000; ++i) pts.emplace_back(g(rng), g(rng), g(rng));
  Vec3 mean;
  const Mat3 s = sample_covariance(pts, &mean);
  Vec3 m = Vec3::Zero();
  for (const auto& p : pts) m += p;
  m /= 1000.0;
  Mat3 ref = Mat3::Zero();
  for (const auto& p : pts) ref += (p - m) * (p - m).transpose();
  ref /= 999.0;
  EXPECT_LT((mean - m).norm(), 1e-9);
  EXPECT_LT((s - ref).norm(), 1e-9 * ref.norm());
}

TEST(MonteCarlo, ZeroPoseCovarianceGivesZeroScatter) {
  RandomSceneOptions o;
  o.pass_sizes = {2, 1};
  o.seed = 4;
  SceneBundle sb = make_ray_bundle(random_scene(o));
  sb.model.pose_covariance.setZero();
  MonteCarloOptions mo;
  mo.n_samples = 200;
  const MonteCarloResult r = monte_carlo_scatter(sb.model, mo);
  EXPECT_EQ(r.sample_covariance, Mat3::Zero());
}

TEST(MonteCarlo, OutputIndependentOfThreadCount) {
  RandomSceneOptions o;
  o.pass_sizes = {3, 2, 1};
  o.seed = 5;
  const SceneBundle sb = make_ray_bundle(random_scene(o));
  MonteCarloOptions mo;
  mo.n_samples = 3001;
  mo.seed = 77;
  mo.weighted = true;
  const MonteCarloResult a = monte_carlo_scatter(sb.model, mo);
  mo.threads = 4;
  const MonteCarloResult b = monte_carlo_scatter(sb.model, mo);
  mo.threads = 16;
  const MonteCarloResult c = monte_carlo_scatter(sb.model, mo);
  ASSERT_EQ(a.points.size(), 3001u);
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    ASSERT_EQ(a.points[i], b.points[i]);
    ASSERT_EQ(a.points[i], c.points[i]);
  }
  EXPECT_EQ(a.sample_covariance, c.sample_covariance);
}

TEST(MonteCarlo, UnweightedScatterMatchesEstimatorCovariance) {
  RandomSceneOptions o;
  o.pass_sizes = {3, 3};
  o.sensors = {SensorType::kWorldView2, SensorType::kQuickBird};
  o.seed = 6;
  const SceneBundle sb = make_ray_bundle(random_scene(o));
  MonteCarloOptions mo;
  mo.n_samples = 20000;
  mo.seed = 1;
  const MonteCarloResult r = monte_carlo_scatter(sb.model, mo);
  const Mat3 p = UnweightedIntersector(sb.model.bundle.rays).estimator_covariance(*sb.model.bundle.ray_covariance);
  EXPECT_LT(relative_frobenius_error(r.sample_covariance, p), 0.05);
}

// ---- binning and fusion ----

TEST(Fusion, BinningMatchesBruteForce) {
  std::mt19937_64 rng(7);
  const StereoCloud cloud = random_cloud(3000, rng);
  std::vector<oracle::CloudPoint> pts;
  for (const auto& p : cloud.points) pts.push_back({p.x, p.y, p.z, p.p});
  const GridSpec grid{0.0, 10.0, 0.5, 20, 20};
  for (double r : {0.3, 0.5, 1.2}) {
    for (int k : {1, 8, 16, 1000}) {
      const auto cells = bin_points(cloud, grid, r, k);
      ASSERT_EQ(cells.size(), grid.size());
      for (int row = 0; row < grid.height; ++row) {
        for (int col = 0; col < grid.width; ++col) {
          const Vec2 c = grid.cell_center(col, row);
          const auto ref = oracle::brute_force_neighbors(pts, c.x(), c.y(), r, k);
          const auto& got = cells[grid.index(col, row)];
          ASSERT_EQ(got.size(), ref.size());
          for (std::size_t i = 0; i < ref.size(); ++i) {
            EXPECT_EQ(got[i].index, ref[i].index);
            EXPECT_DOUBLE_EQ(got[i].distance, ref[i].distance);
          }
        }
      }
    }
  }
  EXPECT_THROW(bin_points(cloud, grid, 0.0, 4), Error);
}

TEST(Fusion, InverseDistanceElevation) {
  std::vector<NeighborPoint> n{{{0, 0, 1.0, 1.0}, 1.0, 0}, {{0, 0, 3.0, 1.0}, 1.0, 1}};
  EXPECT_DOUBLE_EQ(bin_elevation(n, 0.01).z, 2.0);
  EXPECT_DOUBLE_EQ(bin_elevation(n, 0.01).pbar, 1.0);
  // Weights p / d: (1/1, 0.5/0.5) for z = (1, 4).
  std::vector<NeighborPoint> m{{{0, 0, 1.0, 1.0}, 1.0, 0}, {{0, 0, 4.0, 0.5}, 0.5, 1}};
  EXPECT_DOUBLE_EQ(bin_elevation(m, 0.01).z, 2.5);
  // Floored distance.
  std::vector<NeighborPoint> f{{{0, 0, 1.0, 1.0}, 0.0, 0}, {{0, 0, 5.0, 1.0}, 0.2, 1}};
  EXPECT_NEAR(bin_elevation(f, 0.1).z, (1.0 * 10 + 5.0 * 5) / 15.0, 1e-15);

  std::vector<NeighborPoint> h{{{0, 0, 0, 0.5}, 1.0, 0}, {{0, 0, 0, 1.5}, 2.0, 1}};
  EXPECT_DOUBLE_EQ(horizontal_variance(h), (0.5 * 1 + 1.5 * 4) / 2.0);

  const std::vector<PairEstimate> pairs{{0, 0.5, 1.0}, {0, 1.5, 3.0}};
  EXPECT_DOUBLE_EQ(*fuse_horizontal(pairs), (0.5 + 4.5) / 2.0);
  const std::vector<PairEstimate> none{{0, 0.0, 1.0}};
  EXPECT_FALSE(fuse_horizontal(none).has_value());
}

TEST(Fusion, ConsensusMatchesExhaustiveSubsets) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> count(1, 9);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = count(rng);
    std::vector<double> z(n), p(n);
    std::vector<ElevationSample> v(n);
    for (int i = 0; i < n; ++i) {
      z[i] = u(rng) < 0.6 ? 10.0 + 0.4 * (u(rng) - 0.5) : 10.0 + 8.0 * (u(rng) - 0.5);
      // Quantized values exercise the tie-breaks.
      if (trial % 3 == 0) z[i] = std::round(z[i] * 4) / 4;
      p[i] = trial % 5 == 0 ? 0.5 : std::max(0.01, u(rng));
      v[i] = {z[i], p[i]};
    }
    const ConsensusResult r = consensus_fuse(v, 0.5);
    const oracle::Consensus o = oracle::exhaustive_consensus(z, p, 0.5);
    ASSERT_EQ(r.members, o.members) << "trial " << trial;
    EXPECT_EQ(r.z, o.z);
    EXPECT_EQ(r.sigma_z, o.sigma);
    EXPECT_EQ(r.expected_count, o.mass);
  }
}

TEST(Fusion, ConsensusIsPermutationInvariant) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ElevationSample> v;
    for (int i = 0; i < 8; ++i) v.push_back({std::round(20 * u(rng)) / 10.0, 0.5});
    const ConsensusResult a = consensus_fuse(v, 0.3);
    std::vector<int> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<ElevationSample> w;
    for (int i : order) w.push_back(v[i]);
    const ConsensusResult b = consensus_fuse(w, 0.3);
    std::vector<double> za, zb;
    for (int i : a.members) za.push_back(v[i].z);
    for (int i : b.members) zb.push_back(w[i].z);
    std::sort(za.begin(), za.end());
    std::sort(zb.begin(), zb.end());
    EXPECT_EQ(za, zb);
    EXPECT_NEAR(a.z, b.z, 1e-12);
    EXPECT_NEAR(a.sigma_z, b.sigma_z, 1e-12);
  }
}

TEST(Fusion, ConsensusRejectsOutliers) {
  const std::vector<ElevationSample> v{{5.0, 0.9}, {5.1, 0.8}, {4.9, 0.9}, {25.0, 0.05}, {-3.0, 0.05}};
  const ConsensusResult r = consensus_fuse(v, 0.5);
  EXPECT_EQ(r.members, (std::vector<int>{0, 1, 2}));
  EXPECT_NEAR(r.z, (5.0 * 0.9 + 5.1 * 0.8 + 4.9 * 0.9) / 2.6, 1e-12);
  EXPECT_THROW(consensus_fuse(v, 0.0), Error);
}

TEST(Fusion, FlatSurfaceRecoveredAndThreadInvariant) {
  StereoCloudOptions co;
  co.sigma_z = 0.05;
  co.seed = 3;
  co.n_pairs = 5;
  const auto clouds = make_stereo_clouds(*make_plane(12.0), co);
  const GridSpec grid = GridSpec::covering(1, 1, 9, 9, 0.5);
  const DsmGrid a = fuse_dsm(clouds, grid);
  FusionOptions fo;
  fo.threads = 4;
  fo.median = true;
  const DsmGrid b = fuse_dsm(clouds, grid, fo);
  ASSERT_EQ(a.z.values.size(), grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    ASSERT_TRUE(std::isfinite(a.z.values[k]));
    EXPECT_NEAR(a.z.values[k], 12.0, 0.1);
    EXPECT_EQ(a.z.values[k], b.z.values[k]);
    EXPECT_EQ(a.sigma_h.values[k], b.sigma_h.values[k]);
    EXPECT_GT(a.sigma_h.values[k], 0.0);
    EXPECT_LT(a.sigma_h.values[k], 0.5);
    EXPECT_EQ(a.low_confidence[k], 0);
    EXPECT_NEAR(b.median_z->values[k], 12.0, 0.1);
  }
}

// ---- normalized distance ----

TEST(Evaluation, ScalarNormalizedDistance) {
  EXPECT_DOUBLE_EQ(normalized_distance(3.0, 1.0, 0.5), 4.0);
  EXPECT_DOUBLE_EQ(normalized_distance(1.0005, 1.0, 0.0), 0.0);
  EXPECT_EQ(normalized_distance(1.1, 1.0, 0.0), kInfiniteDistance);
}

TEST(Evaluation, H90Radius) {
  EXPECT_NEAR(h90_radius(0.45, 0.5), 1.3192533905932737, 1e-15);
  EXPECT_NEAR(h90_radius(0.0, 0.5), 0.35355339059327373, 1e-16);
  EXPECT_THROW(h90_radius(-0.1, 0.5), Error);
  EXPECT_THROW(h90_radius(0.1, 0.0), Error);
}

TEST(Evaluation, LinearBoundCoversNinetyPercent) {
  EXPECT_NEAR(oracle::normal_within(kLe90Factor), 0.8998237976236569, 1e-15);
  // Circular: Rayleigh CDF at 2.146 sigma.
  EXPECT_NEAR(1.0 - std::exp(-kCe90Factor * kCe90Factor / 2.0), 0.90, 1e-3);
}

TEST(Evaluation, RasterDistanceAndSummary) {
  const GridSpec g{0, 3, 1, 3, 3};
  Raster z(g, 0.0), s(g, 1.0), gt(g, 0.0);
  z.at(0, 0) = 2.0;
  z.at(1, 1) = std::nan("");
  z.at(2, 2) = 0.5;
  const Raster d = normalized_distance(z, s, gt);
  EXPECT_DOUBLE_EQ(d.at(0, 0), 2.0);
  EXPECT_FALSE(d.valid(1, 1));
  const NdistSummary sum = summarize(d);
  EXPECT_EQ(sum.valid, 8u);
  EXPECT_EQ(sum.within_1, 7u);
  EXPECT_EQ(sum.within_le90, 7u);
  const GridSpec other{0, 3, 0.5, 3, 3};
  EXPECT_THROW(normalized_distance(z, s, Raster(other, 0.0)), Error);
}

TEST(Evaluation, NeighborhoodNeverWorseThanCellwise) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> g(0, 1);
  const GridSpec grid{0, 20, 0.5, 40, 40};
  Raster z(grid), s(grid, 0.3), gt(grid), r(grid, 0.8);
  for (int row = 0; row < grid.height; ++row) {
    for (int col = 0; col < grid.width; ++col) {
      gt.at(col, row) = col > 20 ? 2.0 : 0.0;
      z.at(col, row) = (col > 21 ? 2.0 : 0.0) + 0.3 * g(rng);
    }
  }
  const Raster plain = normalized_distance(z, s, gt);
  const Raster near = neighborhood_normalized_distance(z, s, gt, r);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    EXPECT_LE(near.values[k], plain.values[k]);
  }
  // Zero radius degenerates to the cellwise comparison.
  const Raster self = neighborhood_normalized_distance(z, s, gt, Raster(grid, 0.0));
  for (std::size_t k = 0; k < grid.size(); ++k) EXPECT_EQ(self.values[k], plain.values[k]);
}

// ---- total variation ----

TEST(TotalVariation, FlatDisparityReachesMaxClass) {
  const DisparityGrid flat(20, 20, 3.0);
  for (double g : tv_gradient(flat)) EXPECT_EQ(g, 0.0);
  const ClassGrid c = tv_class(flat, 2.0, 10);
  for (int v : c.classes) EXPECT_EQ(v, 10);
}

TEST(TotalVariation, GradientDefinitionAndInvalidPixels) {
  DisparityGrid d(3, 3, 0.0);
  d.at(1, 1) = 4.0;
  d.at(2, 1) = 5.0;
  d.at(1, 2) = 13.0;
  d.at(0, 0) = std::nan("");
  d.at(2, 0) = std::nan("");
  const auto g = tv_gradient(d);
  EXPECT_DOUBLE_EQ(g[1 * 3 + 1], std::sqrt(1.0 + 9.0));
  EXPECT_TRUE(std::isnan(g[0]));
  // Right border: forward difference clamps to itself.
  EXPECT_DOUBLE_EQ(g[1 * 3 + 2], std::sqrt(0.0 + 5.0));
  // Invalid neighbor contributes nothing.
  EXPECT_DOUBLE_EQ(g[0 * 3 + 1], std::sqrt(0.0 + 4.0));
  const ClassGrid c = tv_class(d, 2.0, 3);
  EXPECT_EQ(c.at(0, 0), kInvalidClass);
  EXPECT_THROW(tv_class(d, 0.0, 3), Error);
  EXPECT_THROW(tv_class(d, 1.0, 0), Error);
}

TEST(TotalVariation, RougherDisparityGetsLowerClass) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0, 1);
  DisparityGrid smooth(30, 30), rough(30, 30);
  for (int j = 0; j < 30; ++j) {
    for (int i = 0; i < 30; ++i) {
      smooth.at(i, j) = 0.01 * i + 0.01 * g(rng);
      rough.at(i, j) = 0.01 * i + 1.0 * g(rng);
    }
  }
  const ClassGrid cs = tv_class(smooth, 2.0, 10);
  const ClassGrid cr = tv_class(rough, 2.0, 10);
  const double ms = std::accumulate(cs.classes.begin(), cs.classes.end(), 0.0);
  const double mr = std::accumulate(cr.classes.begin(), cr.classes.end(), 0.0);
  EXPECT_GT(ms, mr);
}

TEST(TotalVariation, CalibrationTable) {
  const TvCalibration cal{{0, 2, 10}, {2.0, 1.0, 0.2}};
  EXPECT_NO_THROW(cal.validate());
  EXPECT_DOUBLE_EQ(tv_to_sigma(1.0, cal), 1.5);
  EXPECT_DOUBLE_EQ(tv_to_sigma(-3.0, cal), 2.0);
  EXPECT_DOUBLE_EQ(tv_to_sigma(50.0, cal), 0.2);
  EXPECT_NEAR(tv_to_sigma(6.0, cal), 0.6, 1e-15);
  EXPECT_THROW((TvCalibration{{0, 1}, {1.0, 2.0}}.validate()), Error);
  EXPECT_THROW((TvCalibration{{0, 1}, {1.0}}.validate()), Error);
  const ClassGrid c{2, 1, {kInvalidClass, 2}};
  const auto s = tv_to_sigma(c, cal);
  EXPECT_TRUE(std::isnan(s[0]));
  EXPECT_DOUBLE_EQ(s[1], 1.0);
}

// ---- file formats ----

TEST(Formats, RasterRoundTrip) {
  const fs::path dir = scratch("raster");
  const GridSpec g{100.0, 200.0, 0.5, 4, 3};
  Raster r(g);
  for (std::size_t k = 0; k < g.size(); ++k) r.values[k] = 0.25 * static_cast<double>(k);
  r.values[5] = std::nan("");
  Provenance prov;
  prov.config_hash = fnv1a_hex("cfg");
  prov.seed = 42;
  write_raster(dir / "z", r, Layer::kZ, prov);
  const LoadedRaster back = read_raster(dir / "z");
  EXPECT_EQ(back.raster.spec, g);
  EXPECT_EQ(back.layer, Layer::kZ);
  ASSERT_TRUE(back.provenance.has_value());
  EXPECT_EQ(back.provenance->seed, 42u);
  EXPECT_FALSE(back.raster.valid(1, 1));
  EXPECT_DOUBLE_EQ(back.raster.values[7], 1.75);
  EXPECT_EQ(fs::file_size(dir / "z.f32"), g.size() * 4);
  EXPECT_THROW(read_raster(dir / "missing"), Error);
}

TEST(Formats, CloudRoundTrip) {
  const fs::path dir = scratch("cloud");
  std::mt19937_64 rng(12);
  StereoCloud c = random_cloud(50, rng);
  c.pair_id = "pair_007";
  write_cloud_binary(dir / "pair_007.bin", c);
  write_cloud_csv(dir / "pair_007.csv", c);
  const StereoCloud b = read_cloud(dir / "pair_007.bin");
  const StereoCloud t = read_cloud(dir / "pair_007.csv");
  EXPECT_EQ(b.pair_id, "pair_007");
  EXPECT_EQ(t.pair_id, "pair_007");
  ASSERT_EQ(b.points.size(), 50u);
  ASSERT_EQ(t.points.size(), 50u);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_EQ(b.points[i].z, c.points[i].z);
    EXPECT_EQ(t.points[i].p, c.points[i].p);
  }
  c.points[3].p = 0.0;
  write_cloud_csv(dir / "bad.csv", c);
  try {
    read_cloud(dir / "bad.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
  try {
    read_cloud(dir / "nope.bin");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}
