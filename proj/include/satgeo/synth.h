#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "satgeo/affine_camera.h"
#include "satgeo/monte_carlo.h"
#include "satgeo/point_cloud.h"
#include "satgeo/pose_model.h"
#include "satgeo/rpc.h"
#include "satgeo/surface.h"

namespace satgeo {

struct PushbroomOptions {
  double gsd = 0.5;              // m per pixel
  double perturbation_px = 0.0;  // peak of the cubic L*P*H term added to line and sample
};

// RPC whose projection is the parallel projection along the pose's view
// direction onto the sensor X (line) and Y (sample) axes, made affine in the
// linearized local frame at pose.origin, plus an optional cubic term. The
// normalization cube is `tile` (local meters), so L, P, H span [-1, 1] over
// it.
RpcModel make_pushbroom_rpc(const ImagePoseSpec& pose, const Box3& tile,
                            const PushbroomOptions& options = {});

struct SceneImage {
  ImagePoseSpec pose;
  PoseErrorSpec errors;
  std::string sensor;  // informational
};

struct SyntheticScene {
  std::string name;
  GeodeticPoint origin;
  std::vector<SceneImage> images;
  Vec3 truth = Vec3::Zero();  // local ENU at `origin`
  std::uint64_t seed = 0;

  // Throws kDomain for fewer than 2 images.
  void validate() const;
};

inline constexpr double kConditionWarning = 1e4;

struct SceneBundle {
  PropagationModel model;  // rays through the truth, S_eps attached
  std::vector<SatelliteState> states;
  PoseCovariance pose_covariance;
  double condition_number = 0.0;
  std::vector<std::string> warnings;
};

// One ray per image through scene.truth, with sensor-axis plane frames, the
// Eq-17 Jacobian and S_eps = J S_phi J^T. Adds a warning when the normal
// matrix condition number exceeds kConditionWarning.
SceneBundle make_ray_bundle(const SyntheticScene& scene);

struct StereoCloudOptions {
  double xmin = 0.0, xmax = 10.0, ymin = 0.0, ymax = 10.0;
  double lattice = 0.25;         // m between samples
  double jitter = 0.25;          // uniform offset, fraction of `lattice`
  int n_pairs = 5;
  double sigma_xy = 0.0;         // m
  double sigma_z = 0.0;          // m
  double outlier_rate = 0.0;     // fraction in [0, 1)
  std::optional<double> outlier_z;  // fixed outlier elevation; else surface +/- outlier_range
  double outlier_range = 20.0;   // m
  double outlier_p = 0.05;
  double match_scale = 1.0;      // s in p = exp(-d^2 / 2 s^2)
  double occlusion_width = 0.0;  // m around discontinuities
  double occlusion_drop = 0.7;   // drop probability inside the occlusion band
  std::uint64_t seed = 0;

  void validate() const;
};

// Per pair: jittered lattice samples of the surface, Gaussian xy/z noise,
// outliers with low probability and sparse sampling near discontinuities.
// The probability stand-in is exp(-d^2 / 2 s^2), d the length of the noise
// applied to the point (forward/reverse mismatch), floored at 1e-6.
std::vector<StereoCloud> make_stereo_clouds(const Surface& surface, const StereoCloudOptions& options);

// Random multi-pass scene. Pass sizes give the number of images on each
// correlated pass (size 1 means independent); sensors are assigned from
// `sensors` cyclically.
struct RandomSceneOptions {
  std::vector<int> pass_sizes = {1, 1};
  std::vector<SensorType> sensors = {SensorType::kWorldView3};
  double rho = 0.8;
  double min_elevation = 50.0;  // deg
  double max_elevation = 88.0;  // deg
  std::uint64_t seed = 0;
};

SyntheticScene random_scene(const RandomSceneOptions& options);

enum class Site { kBuenosAires, kWpafb, kRichmond, kKandahar };

// View layouts for the four evaluation sites: image counts, pass groupings
// and sensor mixes as published, angles synthesized at coarse precision.
SyntheticScene site_scene(Site site);
Site site_from_string(const std::string& name);
std::string to_string(Site site);

}  // namespace satgeo
