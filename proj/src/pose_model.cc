#include "satgeo/pose_model.h"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "satgeo/error.h"

namespace satgeo {

void PoseErrorSpec::validate() const {
  if (!(pos_var >= 0.0 && omega_var >= 0.0 && phi_var >= 0.0 && kappa_var >= 0.0)) {
    throw Error(ErrorKind::kDomain, "pose variances must be non-negative");
  }
  if (!(rho > -1.0 && rho < 1.0)) {
    throw Error(ErrorKind::kDomain, "same-pass correlation must lie in (-1, 1)");
  }
}

PoseErrorSpec sensor_error_spec(SensorType sensor, double rho) {
  auto from_sigmas = [rho](double pos_sigma, double att_sigma) {
    const double att = att_sigma * att_sigma;
    return PoseErrorSpec{pos_sigma * pos_sigma, att, att, 2.0 * att, rho};
  };
  switch (sensor) {
    case SensorType::kGeoEye1: return from_sigmas(0.7071, 2e-6);
    case SensorType::kQuickBird: return from_sigmas(1.0, 23.203e-6);
    case SensorType::kWorldView1: return from_sigmas(0.7071, 3.742e-6);
    case SensorType::kWorldView2: return from_sigmas(0.7071, 2.83e-6);
    case SensorType::kWorldView3: return PoseErrorSpec{0.5, 8e-12, 8e-12, 16e-12, rho};
  }
  throw Error(ErrorKind::kDomain, "unknown sensor type");
}

SensorType sensor_from_string(const std::string& name) {
  if (name == "GeoEye-1") return SensorType::kGeoEye1;
  if (name == "QuickBird") return SensorType::kQuickBird;
  if (name == "WorldView1") return SensorType::kWorldView1;
  if (name == "WorldView2") return SensorType::kWorldView2;
  if (name == "WorldView3") return SensorType::kWorldView3;
  throw Error(ErrorKind::kConfig, "unknown sensor '" + name + "'");
}

std::string to_string(SensorType sensor) {
  switch (sensor) {
    case SensorType::kGeoEye1: return "GeoEye-1";
    case SensorType::kQuickBird: return "QuickBird";
    case SensorType::kWorldView1: return "WorldView1";
    case SensorType::kWorldView2: return "WorldView2";
    case SensorType::kWorldView3: return "WorldView3";
  }
  return "unknown";
}

void ImagePoseSpec::validate() const {
  if (!(elevation > 0.0 && elevation <= std::numbers::pi / 2 + 1e-12)) {
    throw Error(ErrorKind::kDomain, "image '" + id + "': elevation must be in (0, 90] deg");
  }
  if (!(altitude > 0.0)) {
    throw Error(ErrorKind::kDomain, "image '" + id + "': altitude must be positive");
  }
  satgeo::validate(origin);
}

SensorAxes SatelliteState::axes_in(const LocalFrame& frame) const {
  const Mat3 to_local = frame.enu_to_ecf().transpose();
  return {to_local * ecf_to_sensor.row(0).transpose(),
          to_local * ecf_to_sensor.row(1).transpose(), slant_range};
}

Vec3 SatelliteState::boresight_in(const LocalFrame& frame) const {
  return frame.enu_to_ecf().transpose() * ecf_to_sensor.row(2).transpose();
}

Vec3 satellite_direction_enu(double azimuth, double elevation) {
  return {std::cos(elevation) * std::sin(azimuth), std::cos(elevation) * std::cos(azimuth),
          std::sin(elevation)};
}

Vec3 satellite_position(const Vec3& origin_ecf, const Vec3& direction_ecf, double orbit_radius) {
  const double b = origin_ecf.dot(direction_ecf);
  const double c = origin_ecf.squaredNorm() - orbit_radius * orbit_radius;
  const double disc = b * b - c;
  if (!(disc >= 0.0)) {
    throw Error(ErrorKind::kGeometry, "view ray does not reach the orbit sphere");
  }
  const double k = -b + std::sqrt(disc);
  if (!(k > 0.0)) throw Error(ErrorKind::kGeometry, "orbit sphere lies behind the view ray");
  return origin_ecf + k * direction_ecf;
}

Mat3 icr_frame(const Vec3& position, double inclination) {
  const Vec3 z_u = position.normalized();
  const Vec3 east = Vec3::UnitZ().cross(z_u);
  if (east.norm() < 1e-9) {
    throw Error(ErrorKind::kFrame, "satellite position lies on the polar axis");
  }
  Mat3 local_to_ecf;
  local_to_ecf.col(0) = east.normalized();
  local_to_ecf.col(2) = z_u;
  local_to_ecf.col(1) = z_u.cross(local_to_ecf.col(0));

  const double theta = 2.0 * std::numbers::pi - inclination;
  const Vec3 track_ecf = local_to_ecf * Vec3(std::cos(theta), std::sin(theta), 0.0);

  const Vec3 in_track = track_ecf.normalized();
  const Vec3 cross = position.cross(in_track);
  if (cross.norm() < 1e-9 * position.norm()) {
    throw Error(ErrorKind::kFrame, "ground track is parallel to the radial direction");
  }
  Mat3 icr;
  icr.col(0) = in_track;
  icr.col(1) = cross.normalized();
  icr.col(2) = in_track.cross(icr.col(1));
  return icr;
}

SensorFrame sensor_frame(const Vec3& position, const Vec3& origin_ecf, const Vec3& scan_enu,
                         const GeodeticPoint& origin) {
  const Vec3 los = position - origin_ecf;
  if (!(los.norm() > 0.0)) throw Error(ErrorKind::kFrame, "sensor coincides with the origin");
  const Mat3 enu_to_ecf = enu_to_ecf_rotation(origin);
  const Vec3 scan_ecf = enu_to_ecf * scan_enu;

  const Vec3 sz = los.normalized();
  const Vec3 y = sz.cross(scan_ecf);
  if (y.norm() < 1e-9 * scan_ecf.norm()) {
    throw Error(ErrorKind::kFrame, "scan direction is parallel to the sensor boresight");
  }
  const Vec3 sy = y.normalized();
  const Vec3 sx = sy.cross(sz);

  SensorFrame out;
  out.ecf_to_sensor.row(0) = sx.transpose();
  out.ecf_to_sensor.row(1) = sy.transpose();
  out.ecf_to_sensor.row(2) = sz.transpose();
  // enu -> ecf -> sensor.
  out.enu_to_sensor = out.ecf_to_sensor * enu_to_ecf;
  return out;
}

SatelliteState make_satellite_state(const ImagePoseSpec& pose) {
  pose.validate();
  SatelliteState s;
  s.origin = geodetic_to_ecf(pose.origin);
  const Vec3 view_ecf =
      enu_to_ecf_rotation(pose.origin) * satellite_direction_enu(pose.azimuth, pose.elevation);
  s.position = satellite_position(s.origin, view_ecf,
                                  EllipsoidConstants::kMeanRadius + pose.altitude);
  s.icr_to_ecf = icr_frame(s.position, pose.inclination);
  const Vec3 scan_enu(std::cos(pose.scan_theta), std::sin(pose.scan_theta), 0.0);
  const SensorFrame frame = sensor_frame(s.position, s.origin, scan_enu, pose.origin);
  s.ecf_to_sensor = frame.ecf_to_sensor;
  s.enu_to_sensor = frame.enu_to_sensor;
  s.slant_range = (s.position - s.origin).norm();
  return s;
}

void check_psd(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() == 0) return;
  if (!m.allFinite()) throw Error(ErrorKind::kCovariance, std::string(what) + " is not finite");
  // Compare on the correlation scale so that mixed units (m^2 vs rad^2)
  // do not hide an indefinite sub-block.
  Eigen::VectorXd scale = m.diagonal();
  for (Eigen::Index i = 0; i < scale.size(); ++i) {
    if (scale[i] < 0.0) throw Error(ErrorKind::kCovariance, std::string(what) + " has a negative variance");
    scale[i] = scale[i] > 0.0 ? 1.0 / std::sqrt(scale[i]) : 1.0;
  }
  const Eigen::MatrixXd scaled = scale.asDiagonal() * m * scale.asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (scaled + scaled.transpose()),
                                                           Eigen::EigenvaluesOnly);
  const double trace = scaled.trace();
  if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(trace, 1.0)) {
    std::ostringstream msg;
    msg << what << " is not positive semidefinite (min eigenvalue "
        << eig.eigenvalues().minCoeff() << " on the correlation scale)";
    throw Error(ErrorKind::kCovariance, msg.str());
  }
}

PoseCovariance assemble_pose_covariance(std::span<const PoseErrorEntry> entries) {
  if (entries.empty()) throw Error(ErrorKind::kDomain, "pose covariance needs at least one image");
  const auto n = static_cast<Eigen::Index>(entries.size());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(5 * n, 5 * n);

  auto variances = [](const PoseErrorSpec& e) {
    Eigen::Matrix<double, 5, 1> v;
    v << e.pos_var, e.pos_var, e.pos_var, e.omega_var, e.phi_var;
    return v;
  };

  for (Eigen::Index i = 0; i < n; ++i) {
    entries[i].spec.validate();
    s.block<5, 5>(5 * i, 5 * i) = variances(entries[i].spec).asDiagonal();
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (entries[i].pass_id.empty() || entries[i].pass_id != entries[j].pass_id) continue;
      const double rho = 0.5 * (entries[i].spec.rho + entries[j].spec.rho);
      const Eigen::Matrix<double, 5, 1> cross =
          rho * (variances(entries[i].spec).array() * variances(entries[j].spec).array()).sqrt();
      s.block<5, 5>(5 * i, 5 * j) = cross.asDiagonal();
      s.block<5, 5>(5 * j, 5 * i) = cross.asDiagonal();
    }
  }
  check_psd(s, "pose covariance");
  return {s};
}

Eigen::MatrixXd ray_displacement_jacobian(std::span<const SatelliteState> states) {
  const auto n = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * n, 5 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const SatelliteState& s = states[i];
    const Mat3 icr_to_sensor = s.ecf_to_sensor * s.icr_to_ecf;
    j.block<2, 3>(2 * i, 5 * i) = icr_to_sensor.topRows<2>();
    j(2 * i, 5 * i + 4) = s.slant_range;       // eps_u += |R| phi
    j(2 * i + 1, 5 * i + 3) = -s.slant_range;  // eps_v -= |R| omega
  }
  return j;
}

Eigen::MatrixXd ray_covariance(const Eigen::MatrixXd& jacobian, const Eigen::MatrixXd& pose_cov) {
  if (jacobian.cols() != pose_cov.rows() || pose_cov.rows() != pose_cov.cols()) {
    throw Error(ErrorKind::kDomain, "ray_covariance: Jacobian and pose covariance disagree in size");
  }
  const Eigen::MatrixXd s = jacobian * pose_cov * jacobian.transpose();
  return 0.5 * (s + s.transpose());
}

}  // namespace satgeo
