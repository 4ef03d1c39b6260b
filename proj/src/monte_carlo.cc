#include "satgeo/monte_carlo.h"

#include <algorithm>
#include <thread>

#include <Eigen/Dense>

#include "satgeo/pose_model.h"
#include "satgeo/rng.h"

namespace satgeo {

Eigen::MatrixXd symmetric_factor(const Eigen::MatrixXd& cov) {
  if (!cov.allFinite()) throw Error(ErrorKind::kCovariance, "pose covariance is not finite");
  const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const double tol = 1e-10 * std::abs(sym.trace());
  if (eig.eigenvalues().size() > 0 && eig.eigenvalues().minCoeff() < -tol) {
    throw Error(ErrorKind::kCovariance, "pose covariance is not positive semidefinite");
  }
  const Eigen::VectorXd root =
      eig.eigenvalues().unaryExpr([](double v) { return std::sqrt(std::max(v, 0.0)); });
  return eig.eigenvectors() * root.asDiagonal();
}

Mat3 sample_covariance(const std::vector<Vec3>& points, Vec3* mean) {
  const auto n = points.size();
  if (n < 2) throw Error(ErrorKind::kDomain, "sample covariance needs at least two samples");
  // Shift by the first point so identical samples give exactly zero.
  const Vec3 ref = points.front();
  Vec3 sum = Vec3::Zero();
  for (const Vec3& p : points) sum += p - ref;
  const Vec3 shifted_mean = sum / static_cast<double>(n);
  Mat3 acc = Mat3::Zero();
  for (const Vec3& p : points) {
    const Vec3 d = p - ref - shifted_mean;
    acc += d * d.transpose();
  }
  if (mean) *mean = ref + shifted_mean;
  return acc / static_cast<double>(n - 1);
}

double relative_frobenius_error(const Mat3& estimate, const Mat3& reference) {
  return (estimate - reference).norm() / reference.norm();
}

MonteCarloResult monte_carlo_scatter(const PropagationModel& model, const MonteCarloOptions& options) {
  if (options.n_samples < 2) throw Error(ErrorKind::kDomain, "Monte Carlo needs n_samples >= 2");
  const RayBundle& bundle = model.bundle;
  bundle.validate();
  const auto n_rays = static_cast<Eigen::Index>(bundle.rays.size());
  if (model.jacobian.rows() != 2 * n_rays || model.jacobian.cols() != model.pose_covariance.rows()) {
    throw Error(ErrorKind::kDomain, "Monte Carlo: Jacobian does not match the bundle");
  }

  const Eigen::MatrixXd draw_map = model.jacobian * symmetric_factor(model.pose_covariance);
  const Eigen::Index dim = draw_map.cols();
  const std::vector<Vec3> nominal = bundle.origins();

  std::optional<UnweightedIntersector> unweighted;
  std::optional<WeightedIntersector> weighted;
  if (options.weighted) {
    const Eigen::MatrixXd cov = bundle.ray_covariance
                                    ? *bundle.ray_covariance
                                    : ray_covariance(model.jacobian, model.pose_covariance);
    weighted.emplace(bundle.rays, cov);
  } else {
    unweighted.emplace(bundle.rays);
  }

  MonteCarloResult out;
  out.points.resize(options.n_samples);
  out.seed = options.seed;
  out.n_samples = options.n_samples;
  out.weighted = options.weighted;

  auto run_range = [&](int begin, int end) {
    Eigen::VectorXd z(dim);
    std::vector<Vec3> origins(nominal.size());
    for (int i = begin; i < end; ++i) {
      Engine engine = make_engine(options.seed, static_cast<std::uint64_t>(i));
      for (Eigen::Index k = 0; k < dim; ++k) z[k] = draw_normal(engine);
      const Eigen::VectorXd eps = draw_map * z;
      for (Eigen::Index r = 0; r < n_rays; ++r) {
        const Ray& ray = bundle.rays[r];
        origins[r] = ray.origin + eps[2 * r] * ray.u_axis + eps[2 * r + 1] * ray.v_axis;
      }
      out.points[i] = weighted ? weighted->solve(origins) : unweighted->solve(origins);
    }
  };

  const int threads = std::clamp(options.threads, 1, options.n_samples);
  if (threads == 1) {
    run_range(0, options.n_samples);
  } else {
    std::vector<std::jthread> pool;
    const int chunk = (options.n_samples + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int begin = t * chunk;
      const int end = std::min(options.n_samples, begin + chunk);
      if (begin < end) pool.emplace_back(run_range, begin, end);
    }
  }

  out.sample_covariance = sample_covariance(out.points, &out.mean);
  return out;
}

}  // namespace satgeo
