#include "satgeo/intersect.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

namespace satgeo {
namespace {

constexpr double kMinPairAngle = 1e-6;  // rad

Eigen::MatrixXd stack_plane_basis(std::span<const Ray> rays) {
  Eigen::MatrixXd pi(2 * rays.size(), 3);
  for (std::size_t i = 0; i < rays.size(); ++i) {
    pi.row(2 * i) = rays[i].u_axis.transpose();
    pi.row(2 * i + 1) = rays[i].v_axis.transpose();
  }
  return pi;
}

double symmetric_condition(const Mat3& m) {
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(m, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

void check_conditioning(double condition, const char* what) {
  if (!(condition < kMaxConditionNumber)) {
    std::ostringstream msg;
    msg << what << ": near-parallel ray bundle (condition number " << condition << ")";
    throw Error(ErrorKind::kDegenerateGeometry, msg.str());
  }
}

void check_origin_count(std::span<const Vec3> origins, Eigen::Index rows) {
  if (static_cast<Eigen::Index>(2 * origins.size()) != rows) {
    throw Error(ErrorKind::kDomain, "origin count does not match the ray count");
  }
}

}  // namespace

void RayBundle::validate() const {
  if (rays.size() < 2) {
    throw Error(ErrorKind::kDegenerateGeometry, "intersection needs at least two rays");
  }
  double widest = 0.0;
  for (std::size_t i = 0; i < rays.size(); ++i) {
    for (std::size_t j = i + 1; j < rays.size(); ++j) {
      const double angle = std::atan2(rays[i].direction.cross(rays[j].direction).norm(),
                                      rays[i].direction.dot(rays[j].direction));
      widest = std::max(widest, std::min(angle, std::numbers::pi - angle));
    }
  }
  if (!(widest > kMinPairAngle)) {
    throw Error(ErrorKind::kDegenerateGeometry, "all rays are parallel");
  }
  if (ray_covariance) {
    const auto m = static_cast<Eigen::Index>(2 * rays.size());
    if (ray_covariance->rows() != m || ray_covariance->cols() != m) {
      throw Error(ErrorKind::kDomain, "ray covariance must be 2n x 2n");
    }
  }
}

Eigen::MatrixXd RayBundle::covariance_or_identity() const {
  if (ray_covariance) return *ray_covariance;
  const auto m = static_cast<Eigen::Index>(2 * rays.size());
  return Eigen::MatrixXd::Identity(m, m);
}

std::vector<Vec3> RayBundle::origins() const {
  std::vector<Vec3> out;
  out.reserve(rays.size());
  for (const Ray& r : rays) out.push_back(r.origin);
  return out;
}

UnweightedIntersector::UnweightedIntersector(std::span<const Ray> rays)
    : plane_basis_(stack_plane_basis(rays)) {
  normal_.setZero();
  projectors_.reserve(rays.size());
  for (const Ray& r : rays) {
    const Mat3 p = Mat3::Identity() - r.direction * r.direction.transpose();
    projectors_.push_back(p);
    normal_ += p;
  }
  condition_ = symmetric_condition(normal_);
  check_conditioning(condition_, "unweighted intersection");
  normal_inverse_ = normal_.inverse();
}

Vec3 UnweightedIntersector::solve(std::span<const Vec3> origins) const {
  if (origins.size() != projectors_.size()) {
    throw Error(ErrorKind::kDomain, "origin count does not match the ray count");
  }
  Vec3 rhs = Vec3::Zero();
  for (std::size_t i = 0; i < origins.size(); ++i) rhs += projectors_[i] * origins[i];
  return normal_inverse_ * rhs;
}

Mat3 UnweightedIntersector::estimator_covariance(const Eigen::MatrixXd& ray_cov) const {
  if (ray_cov.rows() != plane_basis_.rows() || ray_cov.cols() != plane_basis_.rows()) {
    throw Error(ErrorKind::kDomain, "ray covariance must be 2n x 2n");
  }
  // P_i u_i = u_i, so the origin displacement passes through unchanged.
  const Mat3 middle = plane_basis_.transpose() * ray_cov * plane_basis_;
  const Mat3 c = normal_inverse_ * middle * normal_inverse_.transpose();
  return 0.5 * (c + c.transpose());
}

Eigen::MatrixXd regularized_inverse(const Eigen::MatrixXd& cov) {
  if (!cov.allFinite()) throw Error(ErrorKind::kCovariance, "ray covariance is not finite");
  const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const double trace = sym.trace();
  const Eigen::VectorXd& values = eig.eigenvalues();
  if (values.minCoeff() < -1e-10 * std::abs(trace)) {
    throw Error(ErrorKind::kCovariance, "ray covariance is not positive semidefinite");
  }
  const double floor =
      std::max(1e-12, 1e-12 * trace / static_cast<double>(std::max<Eigen::Index>(sym.rows(), 1)));
  const Eigen::VectorXd inv = values.unaryExpr([floor](double v) { return 1.0 / std::max(v, floor); });
  const Eigen::MatrixXd w = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (w + w.transpose());
}

WeightedIntersector::WeightedIntersector(std::span<const Ray> rays, const Eigen::MatrixXd& ray_cov)
    : plane_basis_(stack_plane_basis(rays)) {
  if (ray_cov.rows() != plane_basis_.rows() || ray_cov.cols() != plane_basis_.rows()) {
    throw Error(ErrorKind::kDomain, "ray covariance must be 2n x 2n");
  }
  weight_ = regularized_inverse(ray_cov);
  const Eigen::MatrixXd pt_w = plane_basis_.transpose() * weight_;
  Mat3 normal = pt_w * plane_basis_;
  normal = 0.5 * (normal + normal.transpose());
  check_conditioning(symmetric_condition(normal), "weighted intersection");
  covariance_ = normal.inverse();
  covariance_ = 0.5 * (covariance_ + covariance_.transpose());
  gain_ = covariance_ * pt_w;
}

Eigen::VectorXd WeightedIntersector::plane_coordinates(std::span<const Vec3> origins) const {
  check_origin_count(origins, plane_basis_.rows());
  Eigen::VectorXd q(plane_basis_.rows());
  for (std::size_t i = 0; i < origins.size(); ++i) {
    q[2 * i] = plane_basis_.row(2 * i).dot(origins[i]);
    q[2 * i + 1] = plane_basis_.row(2 * i + 1).dot(origins[i]);
  }
  return q;
}

Vec3 WeightedIntersector::solve(std::span<const Vec3> origins) const {
  return gain_ * plane_coordinates(origins);
}

double WeightedIntersector::objective(std::span<const Vec3> origins, const Vec3& x) const {
  const Eigen::VectorXd d = plane_coordinates(origins) - plane_basis_ * x;
  return d.dot(weight_ * d);
}

Vec3 intersect_unweighted(const RayBundle& bundle) {
  bundle.validate();
  const std::vector<Vec3> origins = bundle.origins();
  return UnweightedIntersector(bundle.rays).solve(origins);
}

IntersectionResult intersect_weighted(const RayBundle& bundle) {
  bundle.validate();
  const WeightedIntersector solver(bundle.rays, bundle.covariance_or_identity());
  const std::vector<Vec3> origins = bundle.origins();
  IntersectionResult out;
  out.point = solver.solve(origins);
  out.covariance = solver.covariance();
  out.weighted_residual = std::max(0.0, solver.objective(origins, out.point));
  out.distances.reserve(bundle.rays.size());
  for (const Ray& r : bundle.rays) out.distances.push_back(r.perpendicular_distance(out.point));
  return out;
}

Eigen::MatrixXd mig_covariance(const Eigen::MatrixXd& b, const Eigen::MatrixXd& bp,
                               const Eigen::MatrixXd& sigma_p) {
  if (bp.cols() != sigma_p.rows() || sigma_p.rows() != sigma_p.cols() || bp.rows() != b.rows()) {
    throw Error(ErrorKind::kDomain, "mig_covariance: inconsistent matrix sizes");
  }
  auto spd_inverse = [](const Eigen::MatrixXd& m, const char* what) {
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    const Eigen::VectorXd& v = eig.eigenvalues();
    if (!sym.allFinite() || !(v.minCoeff() > 1e-14 * std::abs(v.maxCoeff()))) {
      throw Error(ErrorKind::kCovariance, std::string(what) + " is singular");
    }
    const Eigen::MatrixXd inv =
        eig.eigenvectors() * v.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
    return Eigen::MatrixXd(0.5 * (inv + inv.transpose()));
  };
  const Eigen::MatrixXd w = spd_inverse(bp * sigma_p * bp.transpose(), "image covariance");
  return spd_inverse(b.transpose() * w * b, "normal matrix");
}

RefineResult refine_intersection(const Vec3& start, const RayBundle& bundle,
                                 std::optional<std::span<const Vec2>> observations,
                                 const RefineOptions& options) {
  bundle.validate();
  const Eigen::Index m = 2 * static_cast<Eigen::Index>(bundle.rays.size());
  const Eigen::MatrixXd b = stack_plane_basis(bundle.rays);
  const Eigen::MatrixXd w = regularized_inverse(bundle.covariance_or_identity());
  const Mat3 normal = b.transpose() * w * b;
  check_conditioning(symmetric_condition(normal), "refinement");
  const Eigen::MatrixXd gain = normal.inverse() * b.transpose() * w;

  Eigen::VectorXd observed(m);
  if (observations) {
    if (static_cast<Eigen::Index>(observations->size()) * 2 != m) {
      throw Error(ErrorKind::kDomain, "one observation per ray is required");
    }
    for (std::size_t i = 0; i < observations->size(); ++i) {
      observed.segment<2>(2 * i) = (*observations)[i];
    }
  } else {
    for (std::size_t i = 0; i < bundle.rays.size(); ++i) {
      observed[2 * i] = bundle.rays[i].u_axis.dot(bundle.rays[i].origin);
      observed[2 * i + 1] = bundle.rays[i].v_axis.dot(bundle.rays[i].origin);
    }
  }

  // `iterations` counts applied updates; the loop stops once the next update
  // would be below tolerance.
  Vec3 x = start;
  for (int iter = 0;; ++iter) {
    const Vec3 step = gain * (observed - b * x);
    if (step.norm() < options.tolerance) return {x, iter};
    if (iter == options.max_iterations) break;
    x += step;
  }
  throw RefinementError("intersection refinement did not converge", x);
}

}  // namespace satgeo
