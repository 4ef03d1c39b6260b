#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "satgeo/geodesy.h"
#include "satgeo/ray.h"

namespace satgeo {

// Per-image pose error model: variances of the in-track/cross-track/radial
// position error (m^2, equal on all three axes) and of the small sensor
// attitude angles omega, phi, kappa (rad^2). `rho` correlates every retained
// parameter with the same parameter of other images on the same pass.
struct PoseErrorSpec {
  double pos_var = 0.0;
  double omega_var = 0.0;
  double phi_var = 0.0;
  double kappa_var = 0.0;
  double rho = 0.0;

  void validate() const;
};

enum class SensorType { kGeoEye1, kQuickBird, kWorldView1, kWorldView2, kWorldView3 };

// Published per-platform position/attitude standard deviations. WorldView3
// uses the nominal single-image matrix diag(0.5, 0.5, 0.5, 8e-12, 8e-12,
// 16e-12). kappa is set to twice the attitude variance for the others; it
// never reaches the intersection.
PoseErrorSpec sensor_error_spec(SensorType sensor, double rho = 0.8);
SensorType sensor_from_string(const std::string& name);
std::string to_string(SensorType sensor);

struct ImagePoseSpec {
  std::string id;
  std::string pass_id;
  double azimuth = 0.0;      // rad, clockwise from North
  double elevation = 0.0;    // rad above the tangent plane
  double altitude = 0.0;     // m
  double inclination = 0.0;  // rad
  double scan_theta = -std::numbers::pi / 2;  // rad from East, CCW (N->S default)
  GeodeticPoint origin;

  void validate() const;
};

struct SatelliteState {
  Vec3 position;        // R_s, ecf
  Vec3 origin;          // R_o, ecf
  Mat3 icr_to_ecf;      // columns (i, c, r)
  Mat3 ecf_to_sensor;   // M, rows (sX, sY, sZ)
  Mat3 enu_to_sensor;   // M_enu
  double slant_range = 0.0;

  // Sensor X/Y axes rotated into `frame` (any local ENU-aligned frame).
  SensorAxes axes_in(const LocalFrame& frame) const;
  // sZ in `frame`: the unit vector from scene to sensor.
  Vec3 boresight_in(const LocalFrame& frame) const;
};

// (cos eE sin az, cos eE cos az, sin eE).
Vec3 satellite_direction_enu(double azimuth, double elevation);

// R_o + k u with |R_o + k u| = orbit_radius, k the positive quadratic root.
// Throws kGeometry when the ray misses the sphere.
Vec3 satellite_position(const Vec3& origin_ecf, const Vec3& direction_ecf, double orbit_radius);

// In-track/cross-track/radial frame at `position` for a descending pass of
// the given orbit inclination (ground-track angle 360 deg - inclination from
// East). Throws kFrame when `position` lies on the polar axis.
Mat3 icr_frame(const Vec3& position, double inclination);

struct SensorFrame {
  Mat3 ecf_to_sensor;
  Mat3 enu_to_sensor;
};

// sZ = (R_s - R_o)/|R_s - R_o|, sY = sZ x S_ecf (normalized), sX = sY x sZ.
// Throws kFrame if the scan direction is parallel to sZ.
SensorFrame sensor_frame(const Vec3& position, const Vec3& origin_ecf, const Vec3& scan_enu,
                         const GeodeticPoint& origin);

SatelliteState make_satellite_state(const ImagePoseSpec& pose);

// Covariance of (dI, dC, dR, omega, phi) over n images (kappa dropped).
struct PoseCovariance {
  Eigen::MatrixXd matrix;
  int image_count() const { return static_cast<int>(matrix.rows() / 5); }
};

struct PoseErrorEntry {
  PoseErrorSpec spec;
  std::string pass_id;
};

// Same-pass cross blocks carry rho_ij * sigma_i * sigma_j per matching
// parameter, rho_ij the mean of the two images' rho. Throws kCovariance if
// the assembled matrix is not positive semidefinite.
PoseCovariance assemble_pose_covariance(std::span<const PoseErrorEntry> entries);

// Block-diagonal 2n x 5n Jacobian of the ray displacements
// eps_u = dU + |R| phi, eps_v = dV - |R| omega, with
// (dU, dV, dW) = M T_icr->ecf (dI, dC, dR).
Eigen::MatrixXd ray_displacement_jacobian(std::span<const SatelliteState> states);

// J S J^T, symmetrized.
Eigen::MatrixXd ray_covariance(const Eigen::MatrixXd& jacobian, const Eigen::MatrixXd& pose_cov);

// Throws kCovariance when the smallest eigenvalue is below -1e-10 * trace.
void check_psd(const Eigen::MatrixXd& m, const char* what);

}  // namespace satgeo
