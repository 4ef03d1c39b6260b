#include "satgeo/affine_camera.h"

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "satgeo/error.h"
#include "satgeo/rng.h"

namespace satgeo {
namespace {

constexpr double kFrameTolerance = 1e-12;
constexpr double kIndependence = 1e-12;

}  // namespace

void Ray::validate() const {
  const bool ok = std::abs(direction.norm() - 1.0) <= kFrameTolerance &&
                  std::abs(u_axis.norm() - 1.0) <= kFrameTolerance &&
                  std::abs(v_axis.norm() - 1.0) <= kFrameTolerance &&
                  std::abs(u_axis.dot(direction)) <= kFrameTolerance &&
                  std::abs(v_axis.dot(direction)) <= kFrameTolerance &&
                  std::abs(u_axis.dot(v_axis)) <= kFrameTolerance &&
                  u_axis.cross(v_axis).dot(direction) > 0.0 && slant_range > 0.0 &&
                  origin.allFinite();
  if (!ok) throw Error(ErrorKind::kGeometry, "ray frame is not a right-handed orthonormal triad");
}

Vec2 Ray::plane_offset(const Vec3& x) const {
  const Vec3 d = origin - x;
  return {u_axis.dot(d), v_axis.dot(d)};
}

double Ray::perpendicular_distance(const Vec3& x) const {
  const Vec3 d = origin - x;
  return (d - d.dot(direction) * direction).norm();
}

Ray make_ray(const Vec3& direction, const Vec3& origin, const RayContext& context) {
  const double len = direction.norm();
  if (!(len > 0.0) || !direction.allFinite()) {
    throw Error(ErrorKind::kGeometry, "ray direction must be a nonzero finite vector");
  }
  Ray ray;
  ray.direction = direction / len;
  ray.origin = origin;

  if (context.sensor) {
    const Vec3& sx = context.sensor->x_axis;
    const Vec3 u = sx - sx.dot(ray.direction) * ray.direction;
    if (u.norm() < 1e-9) throw Error(ErrorKind::kFrame, "sensor X axis is parallel to the ray");
    ray.u_axis = u.normalized();
    ray.v_axis = ray.direction.cross(ray.u_axis);
    ray.slant_range = context.sensor->slant_range;
  } else {
    Vec3 v = ray.direction.cross(Vec3(0.0, -1.0, 0.0));
    if (v.norm() < 1e-6) v = ray.direction.cross(Vec3::UnitX());
    ray.v_axis = v.normalized();
    ray.u_axis = ray.v_axis.cross(ray.direction).normalized();
    if (ray.direction.z() <= 0.0) {
      throw Error(ErrorKind::kGeometry, "ray does not point above the horizon");
    }
    ray.slant_range = context.altitude / ray.direction.z();
  }
  ray.validate();
  return ray;
}

AffineCamera::AffineCamera(const Matrix24& matrix, const Box3& tile)
    : matrix_(matrix), tile_(tile) {
  const Vec3 a0 = row0();
  const Vec3 a1 = row1();
  const Vec3 cross = a0.cross(a1);
  if (!matrix.allFinite() || !(cross.norm() > kIndependence * a0.norm() * a1.norm())) {
    throw Error(ErrorKind::kDegenerateCamera, "affine camera rows are linearly dependent");
  }
  Eigen::Matrix2d gram;
  gram << a0.dot(a0), a0.dot(a1), a0.dot(a1), a1.dot(a1);
  gram_inverse_ = gram.inverse();
  direction_ = cross.normalized();
  if (direction_.z() < 0.0) direction_ = -direction_;
}

Vec2 AffineCamera::project(const Vec3& x) const {
  return matrix_.leftCols<3>() * x + matrix_.col(3);
}

Vec3 AffineCamera::ray_point(double u, double v) const {
  const Vec2 beta = gram_inverse_ * (Vec2(u, v) - matrix_.col(3));
  return beta.x() * row0() + beta.y() * row1();
}

AffineFit fit_affine_camera(const RpcModel& rpc, const Box3& tile, const LocalFrame& frame,
                            const AffineFitOptions& options) {
  if (options.n_samples < 8) {
    throw Error(ErrorKind::kFit, "affine fit needs at least 8 correspondences");
  }
  const int n = options.n_samples;
  const Vec3 center = tile.center();
  Engine engine = make_engine(options.seed);

  Eigen::MatrixXd design(n, 4);
  Eigen::MatrixXd target(n, 2);
  std::vector<Vec3> points(n);
  for (int i = 0; i < n; ++i) {
    Vec3 x;
    for (int k = 0; k < 3; ++k) x[k] = draw_uniform(engine, tile.min[k], tile.max[k]);
    points[i] = x;
    const PixelCoord pix = rpc_project(rpc, frame.to_geodetic(x));
    design.row(i) << (x - center).transpose(), 1.0;
    target.row(i) << pix.sample, pix.line;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < 4) {
    throw Error(ErrorKind::kFit, "affine fit is rank deficient; the tile is degenerate");
  }
  const Eigen::MatrixXd solution = qr.solve(target);  // 4 x 2, centered

  AffineCamera::Matrix24 m;
  for (int r = 0; r < 2; ++r) {
    const Vec3 a = solution.col(r).head<3>();
    m.row(r) << a.transpose(), solution(3, r) - a.dot(center);
  }
  AffineCamera camera(m, tile);

  double sum_sq = 0.0;
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e2 = (camera.project(points[i]) - target.row(i).transpose()).squaredNorm();
    sum_sq += e2;
    worst = std::max(worst, std::sqrt(e2));
  }
  return {camera, std::sqrt(sum_sq / n), worst};
}

Ray affine_ray(const AffineCamera& camera, double u, double v, const RayContext& context) {
  const Vec3 a0 = camera.row0();
  const Vec3 a1 = camera.row1();
  const double det = a0.squaredNorm() * a1.squaredNorm() - a0.dot(a1) * a0.dot(a1);
  if (!(det > kIndependence * a0.squaredNorm() * a1.squaredNorm())) {
    throw Error(ErrorKind::kDegenerateCamera, "singular affine Gram matrix");
  }
  return make_ray(camera.direction(), camera.ray_point(u, v), context);
}

GeodeticPoint back_project_to_height(const RpcModel& rpc, double u, double v, double h,
                                     const BackProjectionOptions& options) {
  // Newton iteration on (lon, lat) in degrees with a central-difference
  // Jacobian.
  Vec2 x(rpc.lon_off, rpc.lat_off);
  const Vec2 step(1e-6 * rpc.lon_scale, 1e-6 * rpc.lat_scale);
  auto residual = [&](const Vec2& ll) {
    const PixelCoord p = rpc_project(rpc, GeodeticPoint::from_degrees(ll.x(), ll.y(), h));
    return Vec2(p.sample - u, p.line - v);
  };

  Vec2 r = residual(x);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (r.norm() < options.tolerance_px) {
      return GeodeticPoint::from_degrees(x.x(), x.y(), h);
    }
    Eigen::Matrix2d jac;
    for (int k = 0; k < 2; ++k) {
      Vec2 dx = Vec2::Zero();
      dx[k] = step[k];
      jac.col(k) = (residual(x + dx) - residual(x - dx)) / (2.0 * step[k]);
    }
    const Eigen::FullPivLU<Eigen::Matrix2d> lu(jac);
    if (!lu.isInvertible()) {
      throw Error(ErrorKind::kBackProjection, "singular RPC Jacobian during back-projection");
    }
    x -= lu.solve(r);
    r = residual(x);
  }
  if (r.norm() < options.tolerance_px) return GeodeticPoint::from_degrees(x.x(), x.y(), h);
  throw Error(ErrorKind::kBackProjection, "RPC back-projection did not converge");
}

Ray back_project_two_planes(const RpcModel& rpc, const LocalFrame& frame, double u, double v,
                            double h0, double h1, const RayContext& context,
                            const BackProjectionOptions& options) {
  if (!(std::abs(h1 - h0) > 1e-9)) {
    throw Error(ErrorKind::kBackProjection, "back-projection planes must differ in height");
  }
  const Vec3 p0 = frame.to_local(back_project_to_height(rpc, u, v, h0, options));
  const Vec3 p1 = frame.to_local(back_project_to_height(rpc, u, v, h1, options));
  Vec3 dir = (p1 - p0).normalized();
  if (dir.z() < 0.0) dir = -dir;
  return make_ray(dir, p0, context);
}

void to_json(nlohmann::json& j, const Box3& box) {
  j = nlohmann::json{{"x", {box.min.x(), box.max.x()}},
                     {"y", {box.min.y(), box.max.y()}},
                     {"z", {box.min.z(), box.max.z()}}};
}

void from_json(const nlohmann::json& j, Box3& box) {
  try {
    for (int k = 0; k < 3; ++k) {
      const auto& axis = j.at(std::string(1, "xyz"[k]));
      box.min[k] = axis.at(0).get<double>();
      box.max[k] = axis.at(1).get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("malformed tile box: ") + e.what());
  }
  if (!((box.max - box.min).array() >= 0.0).all()) {
    throw Error(ErrorKind::kConfig, "tile box max must not be below min");
  }
}

nlohmann::json camera_to_json(const AffineCamera& camera) {
  const auto& m = camera.matrix();
  return nlohmann::json{
      {"A0", {m(0, 0), m(0, 1), m(0, 2)}},
      {"a03", m(0, 3)},
      {"A1", {m(1, 0), m(1, 1), m(1, 2)}},
      {"a13", m(1, 3)},
      {"direction", {camera.direction().x(), camera.direction().y(), camera.direction().z()}},
      {"tile", camera.tile()}};
}

}  // namespace satgeo
