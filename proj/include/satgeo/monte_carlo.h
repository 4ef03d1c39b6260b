#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "satgeo/intersect.h"

namespace satgeo {

// Nominal rays plus the linear map from pose errors to ray displacements.
struct PropagationModel {
  RayBundle bundle;              // nominal rays; ray_covariance = J S J^T
  Eigen::MatrixXd jacobian;      // 2n x 5n
  Eigen::MatrixXd pose_covariance;  // 5n x 5n
};

struct MonteCarloOptions {
  int n_samples = 100000;
  std::uint64_t seed = 0;
  int threads = 1;
  bool weighted = false;  // default mirrors the unweighted per-sample solve
};

struct MonteCarloResult {
  std::vector<Vec3> points;   // ordered by sample index
  Vec3 mean = Vec3::Zero();
  Mat3 sample_covariance = Mat3::Zero();  // unbiased (n - 1)
  std::uint64_t seed = 0;
  int n_samples = 0;
  bool weighted = false;
};

// Symmetric factor L (L L^T = cov) from the eigen-decomposition with
// eigenvalues in [-1e-10 trace, 0) clamped to zero. Throws kCovariance for
// anything more negative.
Eigen::MatrixXd symmetric_factor(const Eigen::MatrixXd& cov);

// Draws pose errors from N(0, S), displaces every ray origin by J * dphi in
// its (u, v) plane and intersects each sample. Sample i uses RNG stream i of
// `seed`, so the output is identical for any thread count.
MonteCarloResult monte_carlo_scatter(const PropagationModel& model, const MonteCarloOptions& options);

// Sample covariance about the mean, accumulated in index order.
Mat3 sample_covariance(const std::vector<Vec3>& points, Vec3* mean = nullptr);

double relative_frobenius_error(const Mat3& estimate, const Mat3& reference);

}  // namespace satgeo
