#pragma once

#include "satgeo/geodesy.h"

namespace satgeo {

struct ErrorEllipsoid {
  Vec3 center = Vec3::Zero();
  Vec3 semi_axes = Vec3::Zero();    // m, descending
  Mat3 orientation = Mat3::Identity();  // columns are the axis directions, det +1
  double confidence = 0.0;
};

// Quantile of the chi-square distribution with `dof` degrees of freedom,
// by bisection on the regularized lower incomplete gamma function.
double chi_square_quantile(double probability, int dof);

// Semi-axis i = sqrt(chi2_3(confidence) * lambda_i). Throws kCovariance for
// an eigenvalue below -1e-12 * trace and kDomain for confidence outside (0, 1).
ErrorEllipsoid error_ellipsoid(const Mat3& covariance, double confidence,
                               const Vec3& center = Vec3::Zero());

// Squared Mahalanobis distance of `x` from `center` under `covariance`.
double mahalanobis_squared(const Mat3& covariance, const Vec3& center, const Vec3& x);

}  // namespace satgeo
