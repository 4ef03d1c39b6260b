#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "json.hpp"
#include "satgeo/geodesy.h"
#include "satgeo/ray.h"
#include "satgeo/rpc.h"

namespace satgeo {

// Axis-aligned box in local meters.
struct Box3 {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extent() const { return max - min; }
};

// Parallel projection (u, v) = [A0; A1] X + (a03, a13) over one tile, with
// u = sample and v = line. The Gram matrix inverse used to back-project
// pixels is computed once at construction.
class AffineCamera {
 public:
  using Matrix24 = Eigen::Matrix<double, 2, 4>;

  // Throws kDegenerateCamera if A0 and A1 are (nearly) parallel.
  AffineCamera(const Matrix24& matrix, const Box3& tile);

  const Matrix24& matrix() const { return matrix_; }
  const Box3& tile() const { return tile_; }
  Vec3 row0() const { return matrix_.block<1, 3>(0, 0).transpose(); }
  Vec3 row1() const { return matrix_.block<1, 3>(1, 0).transpose(); }

  Vec2 project(const Vec3& x) const;

  // Unit A0 x A1, oriented to have a non-negative up component.
  const Vec3& direction() const { return direction_; }

  // Point p = b0 A0 + b1 A1 on the ray of pixel (u, v).
  Vec3 ray_point(double u, double v) const;

 private:
  Matrix24 matrix_;
  Box3 tile_;
  Eigen::Matrix2d gram_inverse_;
  Vec3 direction_;
};

struct AffineFitOptions {
  int n_samples = 100;
  std::uint64_t seed = 0;
};

struct AffineFit {
  AffineCamera camera;
  double rms_residual_px = 0.0;  // RMS of the 2-d reprojection residual
  double max_residual_px = 0.0;  // over the fit samples
};

inline constexpr double kDefaultTileSize = 500.0;

// Least-squares fit of the 8 affine parameters to (local X, rpc_project)
// pairs sampled uniformly in `tile`. Throws kFit for n_samples < 8 or a
// rank-deficient design (e.g. a tile with no height extent).
AffineFit fit_affine_camera(const RpcModel& rpc, const Box3& tile, const LocalFrame& frame,
                            const AffineFitOptions& options = {});

// Throws kDegenerateCamera on a singular Gram matrix.
Ray affine_ray(const AffineCamera& camera, double u, double v, const RayContext& context = {});

struct BackProjectionOptions {
  int max_iterations = 20;
  double tolerance_px = 1e-8;
};

// Intersects pixel (u = sample, v = line) with the height planes h0 and h1 by
// 2-d Newton iteration on (lon, lat), and returns the ray through the two
// solutions in `frame`; the ray origin is the h0 point. Throws
// kBackProjection on non-convergence or h0 == h1.
Ray back_project_two_planes(const RpcModel& rpc, const LocalFrame& frame, double u, double v,
                            double h0, double h1, const RayContext& context = {},
                            const BackProjectionOptions& options = {});

// Point on the height plane `h` that projects to (u, v).
GeodeticPoint back_project_to_height(const RpcModel& rpc, double u, double v, double h,
                                     const BackProjectionOptions& options = {});

void to_json(nlohmann::json& j, const Box3& box);
void from_json(const nlohmann::json& j, Box3& box);
nlohmann::json camera_to_json(const AffineCamera& camera);

}  // namespace satgeo
