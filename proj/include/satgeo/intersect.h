#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "satgeo/error.h"
#include "satgeo/geodesy.h"
#include "satgeo/ray.h"

namespace satgeo {

// Rays observing one 3-d point, all in one local frame, with the optional
// 2n x 2n covariance of their (eps_u, eps_v) origin displacements ordered
// ray by ray. Without a covariance every ray gets unit variance.
struct RayBundle {
  std::vector<Ray> rays;
  std::optional<Eigen::MatrixXd> ray_covariance;

  // Throws kDegenerateGeometry for fewer than 2 rays or when every pair of
  // directions is within 1e-6 rad, kDomain on a covariance size mismatch.
  void validate() const;

  Eigen::MatrixXd covariance_or_identity() const;
  std::vector<Vec3> origins() const;
};

struct IntersectionResult {
  Vec3 point = Vec3::Zero();
  Mat3 covariance = Mat3::Zero();       // inverse of the weighted normal matrix
  double weighted_residual = 0.0;       // objective at `point`
  std::vector<double> distances;        // perpendicular distance to each ray, m
};

inline constexpr double kMaxConditionNumber = 1e12;

// Least-squares intersection minimizing the summed squared perpendicular
// distances. Depends only on the ray directions, so one instance serves any
// number of origin sets.
class UnweightedIntersector {
 public:
  explicit UnweightedIntersector(std::span<const Ray> rays);

  Vec3 solve(std::span<const Vec3> origins) const;

  // Sum of the orthogonal projectors I - r r^T.
  const Mat3& normal_matrix() const { return normal_; }
  double condition_number() const { return condition_; }

  // Covariance of this estimator when the origins are displaced with
  // covariance `ray_cov` in the rays' (u, v) planes: A^-1 Pi^T S Pi A^-1.
  Mat3 estimator_covariance(const Eigen::MatrixXd& ray_cov) const;

 private:
  std::vector<Mat3> projectors_;
  Eigen::MatrixXd plane_basis_;  // 2n x 3, rows u_i^T, v_i^T
  Mat3 normal_;
  Mat3 normal_inverse_;
  double condition_ = 0.0;
};

// Covariance-weighted intersection: minimizes
//   sum_ij d_i(X)^T W_ij d_j(X),  d_i(X) = [u_i^T; v_i^T](p_i - X),
// with W the (floored) inverse ray covariance. The solution is
//   X = (Pi^T W Pi)^-1 Pi^T W q,  q_i = [u_i^T; v_i^T] p_i,
// and (Pi^T W Pi)^-1 is its covariance.
class WeightedIntersector {
 public:
  WeightedIntersector(std::span<const Ray> rays, const Eigen::MatrixXd& ray_cov);

  Vec3 solve(std::span<const Vec3> origins) const;
  double objective(std::span<const Vec3> origins, const Vec3& x) const;

  const Mat3& covariance() const { return covariance_; }
  const Eigen::MatrixXd& weight() const { return weight_; }
  const Eigen::MatrixXd& plane_basis() const { return plane_basis_; }

 private:
  Eigen::VectorXd plane_coordinates(std::span<const Vec3> origins) const;

  Eigen::MatrixXd plane_basis_;  // Pi, 2n x 3
  Eigen::MatrixXd weight_;       // 2n x 2n
  Eigen::MatrixXd gain_;         // 3 x 2n
  Mat3 covariance_;
};

// Inverse of a symmetric covariance with eigenvalues floored at
// max(1e-12, 1e-12 * trace / size). Throws kCovariance if the input is not
// finite or has an eigenvalue below -1e-10 * trace.
Eigen::MatrixXd regularized_inverse(const Eigen::MatrixXd& cov);

Vec3 intersect_unweighted(const RayBundle& bundle);
IntersectionResult intersect_weighted(const RayBundle& bundle);

// Multi-image geopositioning propagation: W = (Bp Sp Bp^T)^-1,
// P = (B^T W B)^-1. Throws kCovariance if either inverse does not exist.
Eigen::MatrixXd mig_covariance(const Eigen::MatrixXd& b, const Eigen::MatrixXd& bp,
                               const Eigen::MatrixXd& sigma_p);

struct RefineOptions {
  int max_iterations = 20;
  double tolerance = 1e-6;  // m
};

struct RefineResult {
  Vec3 point;
  int iterations = 0;
};

class RefinementError : public Error {
 public:
  RefinementError(const std::string& what, Vec3 last)
      : Error(ErrorKind::kRefinement, what), last_(std::move(last)) {}
  const Vec3& last_iterate() const { return last_; }

 private:
  Vec3 last_;
};

// Iterates dX = P B^T W (x_obs - x(X)) with x_i(X) = [u_i^T; v_i^T] X until
// the next update is below `tolerance`; `iterations` is the number of updates
// applied. For rays with fixed directions one update reaches the weighted
// solution.
// `observations` default to each ray's origin in its own (u, v) plane.
RefineResult refine_intersection(const Vec3& start, const RayBundle& bundle,
                                 std::optional<std::span<const Vec2>> observations = std::nullopt,
                                 const RefineOptions& options = {});

}  // namespace satgeo
