#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.h"
#include "satgeo/error.h"
#include "satgeo/pose_model.h"

using namespace satgeo;

namespace {

ImagePoseSpec random_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lon(-179, 179), lat(-70, 70), az(0, 360), el(30, 89.5),
      h(0, 2000), scan(-180, 180);
  ImagePoseSpec p;
  p.id = "p";
  p.origin = GeodeticPoint::from_degrees(lon(rng), lat(rng), h(rng));
  p.azimuth = deg_to_rad(az(rng));
  p.elevation = deg_to_rad(el(rng));
  p.altitude = 620000.0;
  p.inclination = deg_to_rad(97.7783);
  p.scan_theta = deg_to_rad(scan(rng));
  return p;
}

bool orthonormal(const Mat3& m, double tol = 1e-12) {
  return (m.transpose() * m - Mat3::Identity()).norm() < tol && std::abs(m.determinant() - 1.0) < tol;
}

}  // namespace

TEST(PoseModel, SatellitePositionSolvesSphereIntersection) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const ImagePoseSpec p = random_pose(rng);
    const Vec3 o = geodetic_to_ecf(p.origin);
    const Vec3 u = enu_to_ecf_rotation(p.origin) * satellite_direction_enu(p.azimuth, p.elevation);
    EXPECT_NEAR(u.norm(), 1.0, 1e-14);
    const double radius = EllipsoidConstants::kMeanRadius + p.altitude;
    const Vec3 s = satellite_position(o, u, radius);
    const double k = oracle::bisect([&](double t) { return (o + t * u).norm() - radius; }, 0.0, 5.0e6);
    EXPECT_LT((s - (o + k * u)).norm(), 1e-6);
  }
  EXPECT_THROW(satellite_position(Vec3(7.0e6, 0, 0), Vec3(0, 1, 0), 6.9e6), Error);
}

TEST(PoseModel, FramesAreOrthonormal) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const ImagePoseSpec p = random_pose(rng);
    const SatelliteState s = make_satellite_state(p);
    EXPECT_TRUE(orthonormal(s.icr_to_ecf));
    EXPECT_TRUE(orthonormal(s.ecf_to_sensor));
    // Radial axis is the geocentric direction of the satellite.
    EXPECT_LT((s.icr_to_ecf.col(2) - s.position.normalized()).norm(), 1e-12);
    // sZ points from the ground point to the sensor.
    EXPECT_LT((s.ecf_to_sensor.row(2).transpose() - (s.position - s.origin).normalized()).norm(), 1e-12);
    EXPECT_LT((s.enu_to_sensor - s.ecf_to_sensor * enu_to_ecf_rotation(p.origin)).norm(), 1e-12);
    EXPECT_NEAR(s.slant_range, (s.position - s.origin).norm(), 1e-6);
    // Nadir-ish views have slant range close to the altitude.
    EXPECT_GT(s.slant_range, 0.95 * p.altitude);
  }
}

TEST(PoseModel, IcrFrameRejectsPolarAxis) {
  try {
    icr_frame(Vec3(0, 0, 7.0e6), deg_to_rad(97.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFrame);
  }
}

TEST(PoseModel, SensorFrameRejectsScanAlongBoresight) {
  const GeodeticPoint o = GeodeticPoint::from_degrees(10, 10, 0);
  const Vec3 oe = geodetic_to_ecf(o);
  const Vec3 up = enu_to_ecf_rotation(o).col(2);
  EXPECT_THROW(sensor_frame(oe + 6.2e5 * up, oe, Vec3(0, 0, 1), o), Error);
}

TEST(PoseModel, JacobianMatchesExactGeometry) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 50; ++i) {
    const SatelliteState s = make_satellite_state(random_pose(rng));
    const std::vector<SatelliteState> one{s};
    const Eigen::MatrixXd j = ray_displacement_jacobian(one);
    ASSERT_EQ(j.rows(), 2);
    ASSERT_EQ(j.cols(), 5);
    for (int k = 0; k < 5; ++k) {
      const double step = k < 3 ? 1e-2 : 1e-8;
      Eigen::Matrix<double, 5, 1> e = Eigen::Matrix<double, 5, 1>::Zero();
      e[k] = step;
      const Eigen::Vector2d plus =
          oracle::exact_displacement(s.position, s.origin, s.ecf_to_sensor, s.icr_to_ecf, e);
      const Eigen::Vector2d minus =
          oracle::exact_displacement(s.position, s.origin, s.ecf_to_sensor, s.icr_to_ecf, -e);
      const Eigen::Vector2d fd = (plus - minus) / (2 * step);
      EXPECT_LT((fd - j.col(k)).norm(), 1e-3 * j.col(k).norm()) << "pose " << i << " param " << k;
    }
  }
}

TEST(PoseModel, WorldView3NadirVariance) {
  const PoseErrorSpec wv3 = sensor_error_spec(SensorType::kWorldView3);
  EXPECT_DOUBLE_EQ(wv3.pos_var, 0.5);
  EXPECT_DOUBLE_EQ(wv3.phi_var, 8e-12);
  EXPECT_DOUBLE_EQ(wv3.kappa_var, 16e-12);

  // Unit-norm position rows plus the attitude lever arm.
  SatelliteState s;
  s.icr_to_ecf = Mat3::Identity();
  s.ecf_to_sensor = Mat3::Identity();
  s.slant_range = 620000.0;
  const std::vector<SatelliteState> one{s};
  const std::vector<PoseErrorEntry> e{{wv3, ""}};
  const Eigen::MatrixXd cov = ray_covariance(ray_displacement_jacobian(one), assemble_pose_covariance(e).matrix);
  EXPECT_NEAR(cov(0, 0), 620000.0 * 620000.0 * 8e-12 + 0.5, 1e-12);
  EXPECT_NEAR(cov(0, 0), 3.5752, 1e-12);
  EXPECT_NEAR(cov(1, 1), 3.5752, 1e-12);
}

TEST(PoseModel, PublishedSigmasAreSquared) {
  const PoseErrorSpec qb = sensor_error_spec(SensorType::kQuickBird, 0.3);
  EXPECT_DOUBLE_EQ(qb.pos_var, 1.0);
  EXPECT_NEAR(qb.phi_var, 23.203e-6 * 23.203e-6, 1e-24);
  EXPECT_DOUBLE_EQ(qb.rho, 0.3);
  EXPECT_EQ(sensor_from_string(to_string(SensorType::kGeoEye1)), SensorType::kGeoEye1);
  EXPECT_THROW(sensor_from_string("Landsat"), Error);
}

TEST(PoseModel, SamePassBlocksAndPsd) {
  const PoseErrorSpec a = sensor_error_spec(SensorType::kWorldView2, 0.8);
  const PoseErrorSpec b = sensor_error_spec(SensorType::kQuickBird, 0.6);
  const std::vector<PoseErrorEntry> e{{a, "p0"}, {b, "p0"}, {a, "p1"}, {b, ""}, {a, ""}};
  const Eigen::MatrixXd s = assemble_pose_covariance(e).matrix;
  ASSERT_EQ(s.rows(), 25);
  EXPECT_LT((s - s.transpose()).norm(), 1e-30);
  for (int k = 0; k < 5; ++k) {
    const double expected = 0.7 * std::sqrt(s(k, k) * s(5 + k, 5 + k));
    EXPECT_NEAR(s(k, 5 + k), expected, 1e-15 * std::max(1.0, expected));
  }
  // Different passes and empty pass ids are independent.
  EXPECT_EQ((s.block<5, 5>(0, 10).norm()), 0.0);
  EXPECT_EQ((s.block<5, 5>(15, 20).norm()), 0.0);
  // Only matching parameters correlate.
  EXPECT_EQ(s(0, 6), 0.0);

  const std::vector<PoseErrorEntry> bad{{sensor_error_spec(SensorType::kWorldView3, -0.9), "p"},
                                        {sensor_error_spec(SensorType::kWorldView3, -0.9), "p"},
                                        {sensor_error_spec(SensorType::kWorldView3, -0.9), "p"}};
  try {
    assemble_pose_covariance(bad);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::kCovariance);
  }
  PoseErrorSpec neg = a;
  neg.pos_var = -1.0;
  const std::vector<PoseErrorEntry> n{{neg, ""}};
  EXPECT_THROW(assemble_pose_covariance(n), Error);
}

TEST(PoseModel, RayCovarianceIsSymmetricAndChecksSizes) {
  std::mt19937_64 rng(4);
  std::vector<SatelliteState> states;
  std::vector<PoseErrorEntry> e;
  for (int i = 0; i < 4; ++i) {
    states.push_back(make_satellite_state(random_pose(rng)));
    e.push_back({sensor_error_spec(SensorType::kWorldView1), i < 2 ? "a" : "b"});
  }
  const Eigen::MatrixXd j = ray_displacement_jacobian(states);
  const Eigen::MatrixXd c = ray_covariance(j, assemble_pose_covariance(e).matrix);
  EXPECT_EQ(c, c.transpose());
  EXPECT_NO_THROW(check_psd(c, "ray covariance"));
  EXPECT_THROW(ray_covariance(j, Eigen::MatrixXd::Identity(5, 5)), Error);
}
