#include "satgeo/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <Eigen/Geometry>

#include "satgeo/error.h"
#include "satgeo/rng.h"

namespace satgeo {

namespace {

constexpr double kPixelOffset = 5000.0;
constexpr double kPixelScale = 5000.0;
constexpr double kDefaultInclination = 97.7783;  // deg

}  // namespace

RpcModel make_pushbroom_rpc(const ImagePoseSpec& pose, const Box3& tile, const PushbroomOptions& options) {
  if (!(options.gsd > 0.0)) throw Error(ErrorKind::kDomain, "gsd must be positive");
  const Vec3 half = 0.5 * tile.extent();
  if (!(half.minCoeff() > 0.0)) throw Error(ErrorKind::kDomain, "pushbroom tile needs a positive extent");

  const LocalFrame frame(pose.origin, LocalFrame::Kind::kLinearized);
  const SatelliteState state = make_satellite_state(pose);
  const Vec3 view = satellite_direction_enu(pose.azimuth, pose.elevation);
  const Vec3 sx = state.axes_in(frame).x_axis;
  const Vec3 line_axis = (sx - sx.dot(view) * view).normalized();
  const Vec3 samp_axis = view.cross(line_axis);

  const Vec3 c = tile.center();
  const GeodeticPoint gc = frame.to_geodetic(c);
  const GeodeticPoint gx = frame.to_geodetic(c + Vec3(half.x(), 0.0, 0.0));
  const GeodeticPoint gy = frame.to_geodetic(c + Vec3(0.0, half.y(), 0.0));

  RpcModel m;
  m.lon_off = gc.lon_deg();
  m.lat_off = gc.lat_deg();
  m.h_off = gc.h;
  m.lon_scale = gx.lon_deg() - gc.lon_deg();
  m.lat_scale = gy.lat_deg() - gc.lat_deg();
  m.h_scale = half.z();
  m.line_off = m.samp_off = kPixelOffset;
  m.line_scale = m.samp_scale = kPixelScale;
  m.line_den[0] = m.samp_den[0] = 1.0;

  const double k = 1.0 / (options.gsd * kPixelScale);
  for (int axis = 0; axis < 3; ++axis) {
    m.line_num[1 + axis] = line_axis[axis] * half[axis] * k;
    m.samp_num[1 + axis] = samp_axis[axis] * half[axis] * k;
  }
  m.line_num[10] = m.samp_num[10] = options.perturbation_px / kPixelScale;
  m.validate();
  return m;
}

void SyntheticScene::validate() const {
  if (images.size() < 2) throw Error(ErrorKind::kDomain, "a scene needs at least two images");
  satgeo::validate(origin);
  for (const auto& im : images) {
    im.pose.validate();
    im.errors.validate();
  }
  if (!truth.allFinite()) throw Error(ErrorKind::kDomain, "scene truth point is not finite");
}

SceneBundle make_ray_bundle(const SyntheticScene& scene) {
  scene.validate();
  const LocalFrame frame(scene.origin);
  SceneBundle out;
  std::vector<PoseErrorEntry> entries;
  for (const auto& im : scene.images) {
    SatelliteState state = make_satellite_state(im.pose);
    RayContext ctx;
    ctx.sensor = state.axes_in(frame);
    out.model.bundle.rays.push_back(make_ray(state.boresight_in(frame), scene.truth, ctx));
    out.states.push_back(std::move(state));
    entries.push_back({im.errors, im.pose.pass_id});
  }
  out.pose_covariance = assemble_pose_covariance(entries);
  out.model.jacobian = ray_displacement_jacobian(out.states);
  out.model.pose_covariance = out.pose_covariance.matrix;
  out.model.bundle.ray_covariance = ray_covariance(out.model.jacobian, out.model.pose_covariance);
  out.model.bundle.validate();

  const UnweightedIntersector solver(out.model.bundle.rays);
  out.condition_number = solver.condition_number();
  if (out.condition_number > kConditionWarning) {
    char msg[128];
    std::snprintf(msg, sizeof msg, "ill-conditioned ray bundle: condition number %.3g exceeds %.0g",
                  out.condition_number, kConditionWarning);
    out.warnings.emplace_back(msg);
  }
  return out;
}

void StereoCloudOptions::validate() const {
  if (!(xmax > xmin) || !(ymax > ymin)) throw Error(ErrorKind::kDomain, "cloud extent must be positive");
  if (!(lattice > 0.0)) throw Error(ErrorKind::kDomain, "lattice spacing must be positive");
  if (n_pairs < 1) throw Error(ErrorKind::kDomain, "n_pairs must be at least 1");
  if (!(outlier_rate >= 0.0 && outlier_rate < 1.0)) throw Error(ErrorKind::kDomain, "outlier_rate must lie in [0, 1)");
  if (!(occlusion_drop >= 0.0 && occlusion_drop < 1.0)) throw Error(ErrorKind::kDomain, "occlusion_drop must lie in [0, 1)");
  if (!(sigma_xy >= 0.0) || !(sigma_z >= 0.0)) throw Error(ErrorKind::kDomain, "noise sigmas must be non-negative");
  if (!(outlier_p > 0.0 && outlier_p <= 1.0)) throw Error(ErrorKind::kDomain, "outlier_p must lie in (0, 1]");
  if (!(match_scale > 0.0)) throw Error(ErrorKind::kDomain, "match_scale must be positive");
}

std::vector<StereoCloud> make_stereo_clouds(const Surface& surface, const StereoCloudOptions& o) {
  o.validate();
  const int nx = static_cast<int>(std::ceil((o.xmax - o.xmin) / o.lattice));
  const int ny = static_cast<int>(std::ceil((o.ymax - o.ymin) / o.lattice));
  std::vector<StereoCloud> clouds;
  for (int q = 0; q < o.n_pairs; ++q) {
    Engine engine = make_engine(o.seed, static_cast<std::uint64_t>(q));
    StereoCloud cloud;
    char id[32];
    std::snprintf(id, sizeof id, "pair_%03d", q);
    cloud.pair_id = id;
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        // Fixed number of draws per lattice site keeps streams aligned.
        const double jx = draw_uniform(engine, -o.jitter, o.jitter);
        const double jy = draw_uniform(engine, -o.jitter, o.jitter);
        const double dx = o.sigma_xy * draw_normal(engine);
        const double dy = o.sigma_xy * draw_normal(engine);
        const double dz = o.sigma_z * draw_normal(engine);
        const double u_out = draw_uniform(engine, 0.0, 1.0);
        const double u_val = draw_uniform(engine, -1.0, 1.0);
        const double u_occ = draw_uniform(engine, 0.0, 1.0);

        const double x = o.xmin + (i + 0.5 + jx) * o.lattice;
        const double y = o.ymin + (j + 0.5 + jy) * o.lattice;
        if (o.occlusion_width > 0.0 && surface.discontinuity_distance(x, y) < o.occlusion_width &&
            u_occ < o.occlusion_drop) {
          continue;
        }
        const double z = surface.height(x, y);
        if (u_out < o.outlier_rate) {
          const double zo = o.outlier_z ? *o.outlier_z : z + o.outlier_range * u_val;
          cloud.points.push_back({x + dx, y + dy, zo, o.outlier_p});
        } else {
          const double d2 = dx * dx + dy * dy + dz * dz;
          const double p = std::max(1e-6, std::exp(-d2 / (2.0 * o.match_scale * o.match_scale)));
          cloud.points.push_back({x + dx, y + dy, z + dz, p});
        }
      }
    }
    clouds.push_back(std::move(cloud));
  }
  return clouds;
}

namespace {

ImagePoseSpec base_pose(const GeodeticPoint& origin, const std::string& id, const std::string& pass,
                        double az_deg, double el_deg) {
  ImagePoseSpec p;
  p.id = id;
  p.pass_id = pass;
  p.azimuth = deg_to_rad(az_deg);
  p.elevation = deg_to_rad(el_deg);
  p.altitude = kDefaultAltitude;
  p.inclination = deg_to_rad(kDefaultInclination);
  p.origin = origin;
  return p;
}

// Images of one pass lie on a line in the azimuth/elevation plot: a common
// azimuth with elevations spread across the pass.
void add_pass(SyntheticScene& scene, Engine& engine, int size, const std::string& pass_id,
              const std::vector<SensorType>& sensors, std::size_t& sensor_cursor, double rho,
              double min_el, double max_el) {
  const double az = draw_uniform(engine, 0.0, 360.0);
  const double e0 = draw_uniform(engine, min_el, max_el);
  const double e1 = size > 1 ? draw_uniform(engine, min_el, max_el) : e0;
  for (int k = 0; k < size; ++k) {
    const double t = size > 1 ? static_cast<double>(k) / (size - 1) : 0.0;
    const int index = static_cast<int>(scene.images.size());
    char id[32];
    std::snprintf(id, sizeof id, "img_%03d", index);
    const double az_k = size > 1 ? az + draw_uniform(engine, -2.0, 2.0) : az;
    const SensorType sensor = sensors[sensor_cursor++ % sensors.size()];
    SceneImage im;
    im.pose = base_pose(scene.origin, id, size > 1 ? pass_id : "", std::fmod(az_k + 360.0, 360.0),
                        e0 + t * (e1 - e0));
    im.errors = sensor_error_spec(sensor, rho);
    im.sensor = to_string(sensor);
    scene.images.push_back(std::move(im));
  }
}

}  // namespace

SyntheticScene random_scene(const RandomSceneOptions& o) {
  if (o.sensors.empty()) throw Error(ErrorKind::kDomain, "random scene needs at least one sensor");
  Engine engine = make_engine(o.seed, 0);
  SyntheticScene scene;
  scene.name = "random";
  scene.seed = o.seed;
  scene.origin = GeodeticPoint::from_degrees(draw_uniform(engine, -179.0, 179.0),
                                             draw_uniform(engine, -60.0, 60.0),
                                             draw_uniform(engine, 0.0, 500.0));
  scene.truth = Vec3(draw_uniform(engine, -100.0, 100.0), draw_uniform(engine, -100.0, 100.0),
                     draw_uniform(engine, 0.0, 50.0));
  std::size_t cursor = 0;
  for (std::size_t p = 0; p < o.pass_sizes.size(); ++p) {
    add_pass(scene, engine, o.pass_sizes[p], "pass_" + std::to_string(p), o.sensors, cursor, o.rho,
             o.min_elevation, o.max_elevation);
  }
  scene.validate();
  return scene;
}

namespace {

struct SiteTemplate {
  Site site;
  const char* name;
  double lon, lat, h;
  std::vector<int> passes;
  std::vector<std::pair<SensorType, int>> sensors;
};

const std::vector<SiteTemplate>& site_templates() {
  using S = SensorType;
  static const std::vector<SiteTemplate> sites = {
      {Site::kBuenosAires, "buenos-aires", -58.5859220, -34.4894120, 20.0,
       {4, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1},
       {{S::kWorldView3, 29}}},
      {Site::kWpafb, "wpafb", -84.05, 39.78, 250.0,
       {6, 5, 5, 1, 1, 1},
       {{S::kWorldView3, 19}}},
      {Site::kRichmond, "richmond", -77.44, 37.54, 50.0,
       std::vector<int>(44, 1),
       {{S::kGeoEye1, 12}, {S::kQuickBird, 3}, {S::kWorldView1, 1}, {S::kWorldView2, 23}, {S::kWorldView3, 5}}},
      {Site::kKandahar, "kandahar", 65.71, 31.61, 1000.0,
       {2, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1},
       {{S::kWorldView2, 13}, {S::kQuickBird, 2}, {S::kWorldView1, 6}}},
  };
  return sites;
}

const SiteTemplate& find_site(Site site) {
  for (const auto& t : site_templates()) {
    if (t.site == site) return t;
  }
  throw Error(ErrorKind::kDomain, "unknown site");
}

}  // namespace

SyntheticScene site_scene(Site site) {
  const SiteTemplate& t = find_site(site);
  std::vector<SensorType> sensors;
  for (const auto& [type, count] : t.sensors) sensors.insert(sensors.end(), count, type);

  Engine engine = make_engine(0x5174e5ULL, static_cast<std::uint64_t>(site));
  SyntheticScene scene;
  scene.name = t.name;
  scene.origin = GeodeticPoint::from_degrees(t.lon, t.lat, t.h);
  std::size_t cursor = 0;
  for (std::size_t p = 0; p < t.passes.size(); ++p) {
    add_pass(scene, engine, t.passes[p], "pass_" + std::to_string(p), sensors, cursor, 0.8, 45.0, 88.0);
  }
  scene.validate();
  return scene;
}

Site site_from_string(const std::string& name) {
  for (const auto& t : site_templates()) {
    if (name == t.name) return t.site;
  }
  throw Error(ErrorKind::kConfig, "unknown site '" + name + "'");
}

std::string to_string(Site site) { return find_site(site).name; }

}  // namespace satgeo
