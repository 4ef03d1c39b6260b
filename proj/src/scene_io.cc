#include "satgeo/scene_io.h"

#include <fstream>

#include "satgeo/error.h"

namespace satgeo {

namespace {

nlohmann::json geodetic_to_json(const GeodeticPoint& p) {
  return {{"lon", p.lon_deg()}, {"lat", p.lat_deg()}, {"h", p.h}};
}

GeodeticPoint geodetic_from_json(const nlohmann::json& j) {
  return GeodeticPoint::from_degrees(j.at("lon").get<double>(), j.at("lat").get<double>(),
                                     j.value("h", 0.0));
}

}  // namespace

nlohmann::json vec_to_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

nlohmann::json mat_to_json(const Mat3& m) {
  nlohmann::json out = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out.push_back(m(r, c));
  }
  return out;
}

nlohmann::ordered_json scene_to_json(const SyntheticScene& scene) {
  nlohmann::ordered_json j;
  j["name"] = scene.name;
  j["origin"] = geodetic_to_json(scene.origin);
  j["truth_enu"] = vec_to_json(scene.truth);
  j["seed"] = scene.seed;
  j["images"] = nlohmann::ordered_json::array();
  for (const auto& im : scene.images) {
    const auto& p = im.pose;
    nlohmann::ordered_json e;
    e["id"] = p.id;
    e["pass_id"] = p.pass_id;
    e["azimuth_deg"] = rad_to_deg(p.azimuth);
    e["elevation_deg"] = rad_to_deg(p.elevation);
    e["altitude_m"] = p.altitude;
    e["inclination_deg"] = rad_to_deg(p.inclination);
    e["scan_theta_deg"] = rad_to_deg(p.scan_theta);
    e["origin"] = geodetic_to_json(p.origin);
    e["sigmas"] = {{"pos_m", std::sqrt(im.errors.pos_var)},
                   {"omega_rad", std::sqrt(im.errors.omega_var)},
                   {"phi_rad", std::sqrt(im.errors.phi_var)},
                   {"kappa_rad", std::sqrt(im.errors.kappa_var)}};
    e["rho"] = im.errors.rho;
    if (!im.sensor.empty()) e["sensor"] = im.sensor;
    j["images"].push_back(std::move(e));
  }
  return j;
}

SyntheticScene scene_from_json(const nlohmann::json& j) {
  try {
    SyntheticScene scene;
    scene.name = j.value("name", std::string("scene"));
    scene.origin = geodetic_from_json(j.at("origin"));
    if (j.contains("truth_enu")) {
      const auto& t = j.at("truth_enu");
      scene.truth = Vec3(t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>());
    }
    scene.seed = j.value("seed", std::uint64_t{0});
    for (const auto& e : j.at("images")) {
      SceneImage im;
      auto& p = im.pose;
      p.id = e.at("id").get<std::string>();
      p.pass_id = e.value("pass_id", std::string());
      p.azimuth = deg_to_rad(e.at("azimuth_deg").get<double>());
      p.elevation = deg_to_rad(e.at("elevation_deg").get<double>());
      p.altitude = e.value("altitude_m", kDefaultAltitude);
      p.inclination = deg_to_rad(e.value("inclination_deg", 97.7783));
      p.scan_theta = deg_to_rad(e.value("scan_theta_deg", -90.0));
      p.origin = e.contains("origin") ? geodetic_from_json(e.at("origin")) : scene.origin;
      im.sensor = e.value("sensor", std::string());
      const double rho = e.value("rho", 0.8);
      if (e.contains("sigmas")) {
        const auto& s = e.at("sigmas");
        const auto sq = [](double v) { return v * v; };
        im.errors.pos_var = sq(s.at("pos_m").get<double>());
        im.errors.omega_var = sq(s.at("omega_rad").get<double>());
        im.errors.phi_var = sq(s.at("phi_rad").get<double>());
        im.errors.kappa_var = sq(s.value("kappa_rad", 0.0));
        im.errors.rho = rho;
      } else if (!im.sensor.empty()) {
        im.errors = sensor_error_spec(sensor_from_string(im.sensor), rho);
      } else {
        throw Error(ErrorKind::kConfig, "image '" + p.id + "' has neither sigmas nor sensor");
      }
      scene.images.push_back(std::move(im));
    }
    scene.validate();
    return scene;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("bad scene: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kConfig) throw;
    throw Error(ErrorKind::kConfig, std::string("bad scene: ") + e.what());
  }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

SyntheticScene read_scene(const std::filesystem::path& path) {
  const auto j = read_json_file(path);
  try {
    return scene_from_json(j);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

nlohmann::ordered_json intersection_report(const IntersectionResult& result,
                                           const ErrorEllipsoid& ellipsoid, std::uint64_t seed,
                                           int n_samples) {
  nlohmann::ordered_json j;
  j["X_enu"] = vec_to_json(result.point);
  j["P"] = mat_to_json(result.covariance);
  nlohmann::ordered_json e;
  e["confidence"] = ellipsoid.confidence;
  e["semi_axes"] = vec_to_json(ellipsoid.semi_axes);
  e["rotation"] = mat_to_json(ellipsoid.orientation);
  j["ellipsoid"] = e;
  j["residuals"] = result.distances;
  j["weighted_residual"] = result.weighted_residual;
  j["seed"] = seed;
  j["n_samples"] = n_samples;
  return j;
}

}  // namespace satgeo
