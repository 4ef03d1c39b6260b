#pragma once

#include <cstdint>
#include <filesystem>

#include "json.hpp"
#include "satgeo/ellipsoid.h"
#include "satgeo/intersect.h"
#include "satgeo/provenance.h"
#include "satgeo/synth.h"

namespace satgeo {

// Scene configuration: {name, origin{lon,lat,h}, truth_enu[3], seed,
// images[{id, pass_id, azimuth_deg, elevation_deg, altitude_m,
// inclination_deg, scan_theta_deg, origin{lon,lat,h}, sigmas{pos_m,
// omega_rad, phi_rad, kappa_rad}, rho, sensor}]}. An image may name a
// `sensor` instead of giving `sigmas`; a missing image origin means the
// scene origin.
nlohmann::ordered_json scene_to_json(const SyntheticScene& scene);
SyntheticScene scene_from_json(const nlohmann::json& j);  // throws kConfig

// Throws kIo when the file cannot be read, kConfig when it is not JSON.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::ordered_json& j);

SyntheticScene read_scene(const std::filesystem::path& path);

// {X_enu, P (row-major 9), ellipsoid{confidence, semi_axes, rotation},
//  residuals[], seed, n_samples}
nlohmann::ordered_json intersection_report(const IntersectionResult& result,
                                           const ErrorEllipsoid& ellipsoid, std::uint64_t seed,
                                           int n_samples);

nlohmann::json vec_to_json(const Vec3& v);
nlohmann::json mat_to_json(const Mat3& m);  // row-major 9 values

}  // namespace satgeo
