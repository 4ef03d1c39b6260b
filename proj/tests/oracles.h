#pragma once

// Independent reference computations used by the unit and acceptance tests.
// None of these call into the library code they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace oracle {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Cubic with the 20 coefficients spelled out monomial by monomial.
inline double poly20(const std::array<double, 20>& c, double L, double P, double H) {
  return c[0] + c[1] * L + c[2] * P + c[3] * H + c[4] * L * P + c[5] * L * H + c[6] * P * H +
         c[7] * L * L + c[8] * P * P + c[9] * H * H + c[10] * P * L * H + c[11] * L * L * L +
         c[12] * L * P * P + c[13] * L * H * H + c[14] * L * L * P + c[15] * P * P * P +
         c[16] * P * H * H + c[17] * L * L * H + c[18] * P * P * H + c[19] * H * H * H;
}

// Root of a sign-changing f on [lo, hi].
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Closed-form CDF of the chi-square distribution with 3 degrees of freedom.
inline double chi2_3_cdf(double x) {
  return std::erf(std::sqrt(x / 2.0)) - std::sqrt(2.0 * x / std::numbers::pi) * std::exp(-x / 2.0);
}

// Standard normal two-sided mass within +/- k.
inline double normal_within(double k) { return std::erf(k / std::sqrt(2.0)); }

// Midpoint of the common perpendicular of two lines p + t d.
inline Vec3 two_line_midpoint(const Vec3& p1, const Vec3& d1, const Vec3& p2, const Vec3& d2) {
  const Vec3 w = p1 - p2;
  const double a = d1.dot(d1), b = d1.dot(d2), c = d2.dot(d2), d = d1.dot(w), e = d2.dot(w);
  const double den = a * c - b * b;
  const double s = (b * e - c * d) / den;
  const double t = (a * e - b * d) / den;
  return 0.5 * ((p1 + s * d1) + (p2 + t * d2));
}

struct PlaneRay {
  Vec3 direction, u, v;
};

// Covariance of the unweighted least-squares point when ray i's origin is
// displaced by e_u u_i + e_v v_i with covariance S, written as the double
// sum A^-1 (sum_ij D_i S_ij D_j^T) A^-1 with D_i = [u_i v_i] (3 x 2) and
// A = sum_i (I - r_i r_i^T).
inline Mat3 unweighted_covariance(const std::vector<PlaneRay>& rays, const Eigen::MatrixXd& s) {
  Mat3 a = Mat3::Zero();
  for (const auto& r : rays) a += Mat3::Identity() - r.direction * r.direction.transpose();
  Mat3 middle = Mat3::Zero();
  for (std::size_t i = 0; i < rays.size(); ++i) {
    Eigen::Matrix<double, 3, 2> di;
    di << rays[i].u, rays[i].v;
    for (std::size_t j = 0; j < rays.size(); ++j) {
      Eigen::Matrix<double, 3, 2> dj;
      dj << rays[j].u, rays[j].v;
      middle += di * s.block<2, 2>(2 * i, 2 * j) * dj.transpose();
    }
  }
  const Mat3 ai = a.inverse();
  return ai * middle * ai;
}

// Displacement (e_u, e_v) of the ray from a perturbed sensor, measured in
// the plane through `ground` orthogonal to the nominal boresight.
// `ecf_to_sensor` has rows sX, sY, sZ (sZ from ground to sensor);
// `icr_to_ecf` has columns i, c, r. Attitude errors are small rotations of
// the line of sight applied in the sensor frame with the passive sign
// convention d' = Rot(-theta) d.
inline Eigen::Vector2d exact_displacement(const Vec3& sensor, const Vec3& ground, const Mat3& ecf_to_sensor,
                                          const Mat3& icr_to_ecf, const Eigen::Matrix<double, 5, 1>& pose_error) {
  const Vec3 sx = ecf_to_sensor.row(0).transpose();
  const Vec3 sy = ecf_to_sensor.row(1).transpose();
  const Vec3 sz = ecf_to_sensor.row(2).transpose();
  const Vec3 moved = sensor + icr_to_ecf * pose_error.head<3>();
  const Vec3 theta(pose_error[3], pose_error[4], 0.0);
  Vec3 los_sensor(0.0, 0.0, -1.0);
  if (theta.norm() > 0.0) {
    los_sensor = Eigen::AngleAxisd(-theta.norm(), theta.normalized()) * los_sensor;
  }
  const Vec3 los = ecf_to_sensor.transpose() * los_sensor;
  const double t = (ground - moved).dot(sz) / los.dot(sz);
  const Vec3 hit = moved + t * los - ground;
  return {hit.dot(sx), hit.dot(sy)};
}

struct CloudPoint {
  double x, y, z, p;
};

struct Hit {
  std::size_t index;
  double distance;
};

// All-pairs selection: every point within r of (cx, cy), nearest k_max by
// (distance, index).
inline std::vector<Hit> brute_force_neighbors(const std::vector<CloudPoint>& pts, double cx, double cy,
                                              double r, int k_max) {
  std::vector<Hit> hits;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = std::hypot(pts[i].x - cx, pts[i].y - cy);
    if (d <= r) hits.push_back({i, d});
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  });
  if (static_cast<int>(hits.size()) > k_max) hits.resize(k_max);
  return hits;
}

struct Consensus {
  std::vector<int> members;
  double z = 0.0, sigma = 0.0, mass = 0.0;
};

// Enumerates every subset of the values, keeps those that equal the
// tolerance set of some seed, and picks the largest probability mass; ties
// go to the smaller spread, then to the seed that sorts first by (z, p).
inline Consensus exhaustive_consensus(const std::vector<double>& z, const std::vector<double>& p, double tol) {
  const int n = static_cast<int>(z.size());
  Consensus best;
  bool have = false;
  double best_seed_z = 0.0, best_seed_p = 0.0;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    // Seeds whose tolerance set is exactly `mask`.
    for (int s = 0; s < n; ++s) {
      if (!(mask & (1u << s))) continue;
      bool match = true;
      for (int q = 0; q < n && match; ++q) {
        const bool in = std::abs(z[q] - z[s]) < tol;
        match = in == static_cast<bool>(mask & (1u << q));
      }
      if (!match) continue;
      Consensus c;
      double spz = 0.0;
      for (int q = 0; q < n; ++q) {
        if (mask & (1u << q)) {
          c.members.push_back(q);
          c.mass += p[q];
          spz += p[q] * z[q];
        }
      }
      c.z = spz / c.mass;
      double spv = 0.0;
      for (int q : c.members) spv += p[q] * (z[q] - c.z) * (z[q] - c.z);
      c.sigma = std::sqrt(spv / c.mass);
      const bool seed_first = z[s] < best_seed_z || (z[s] == best_seed_z && p[s] < best_seed_p);
      if (!have || c.mass > best.mass || (c.mass == best.mass && c.sigma < best.sigma) ||
          (c.mass == best.mass && c.sigma == best.sigma && seed_first)) {
        best = c;
        best_seed_z = z[s];
        best_seed_p = p[s];
        have = true;
      }
    }
  }
  return best;
}

}  // namespace oracle
