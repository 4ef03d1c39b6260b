#include "satgeo/ellipsoid.h"

#include <cmath>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "satgeo/error.h"

namespace satgeo {

double chi_square_quantile(double probability, int dof) {
  if (!(probability > 0.0 && probability < 1.0) || dof < 1) {
    throw Error(ErrorKind::kDomain, "chi-square quantile needs 0 < p < 1 and dof >= 1");
  }
  const double k = 0.5 * dof;
  auto cdf = [k](double x) { return boost::math::gamma_p(k, 0.5 * x); };
  double lo = 0.0;
  double hi = std::max(1.0, 2.0 * dof);
  while (cdf(hi) < probability) hi *= 2.0;
  for (int iter = 0; iter < 200 && hi - lo > 1e-15 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < probability ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ErrorEllipsoid error_ellipsoid(const Mat3& covariance, double confidence, const Vec3& center) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw Error(ErrorKind::kDomain, "confidence must lie in (0, 1)");
  }
  const Mat3 sym = 0.5 * (covariance + covariance.transpose());
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(sym);
  const Vec3& values = eig.eigenvalues();  // ascending
  if (!sym.allFinite() || values.minCoeff() < -1e-12 * std::abs(sym.trace())) {
    throw Error(ErrorKind::kCovariance, "covariance is not positive semidefinite");
  }
  const double q = chi_square_quantile(confidence, 3);

  ErrorEllipsoid out;
  out.center = center;
  out.confidence = confidence;
  for (int i = 0; i < 3; ++i) {
    out.semi_axes[i] = std::sqrt(q * std::max(values[2 - i], 0.0));
    out.orientation.col(i) = eig.eigenvectors().col(2 - i);
  }
  if (out.orientation.determinant() < 0.0) out.orientation.col(2) *= -1.0;
  return out;
}

double mahalanobis_squared(const Mat3& covariance, const Vec3& center, const Vec3& x) {
  const Vec3 d = x - center;
  return d.dot(covariance.ldlt().solve(d));
}

}  // namespace satgeo
