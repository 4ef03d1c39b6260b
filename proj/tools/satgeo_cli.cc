// satgeo: batch driver for the geolocation error library.
//
// Every subcommand reads an optional JSON config (--config), applies flag
// overrides, writes its outputs under --out and stamps them with
// {tool, version, config_hash, seed}. Exit codes: 0 success, 1 numerical or
// domain error, 2 I/O or configuration error.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "satgeo/affine_camera.h"
#include "satgeo/dsm_fusion.h"
#include "satgeo/ellipsoid.h"
#include "satgeo/error.h"
#include "satgeo/evaluation.h"
#include "satgeo/intersect.h"
#include "satgeo/monte_carlo.h"
#include "satgeo/point_cloud.h"
#include "satgeo/provenance.h"
#include "satgeo/raster.h"
#include "satgeo/rng.h"
#include "satgeo/scene_io.h"
#include "satgeo/surface.h"
#include "satgeo/synth.h"
#include "satgeo/total_variation.h"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using namespace satgeo;

namespace {

struct Common {
  std::string config_path;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

// Effective configuration: file contents with flag overrides applied.
struct Run {
  json cfg = json::object();
  fs::path config_dir = ".";
  fs::path out;
  std::uint64_t seed = 0;
  int threads = 1;
  Provenance provenance;

  // Relative paths in the config are taken relative to the config file.
  fs::path path(const std::string& key) const {
    const fs::path p = cfg.at(key).get<std::string>();
    return p.is_absolute() ? p : config_dir / p;
  }
  fs::path output(const std::string& name) const { return out / name; }
};

void log(const std::string& msg) { std::cerr << "satgeo: " << msg << '\n'; }

Run make_run(const Common& common, const std::function<void(json&)>& overrides) {
  Run run;
  if (!common.config_path.empty()) {
    run.cfg = read_json_file(common.config_path);
    if (!run.cfg.is_object()) throw Error(ErrorKind::kConfig, common.config_path + ": config must be a JSON object");
    run.config_dir = fs::path(common.config_path).parent_path();
    if (run.config_dir.empty()) run.config_dir = ".";
  }
  overrides(run.cfg);
  if (common.seed) run.cfg["seed"] = *common.seed;
  run.seed = run.cfg.value("seed", std::uint64_t{0});
  run.threads = std::max(1, common.threads);
  run.out = common.out;
  std::error_code ec;
  fs::create_directories(run.out, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create output directory " + run.out.string());
  // The hash covers everything that can change results; threads and the
  // output location cannot.
  run.provenance.config_hash = fnv1a_hex(run.cfg.dump());
  run.provenance.seed = run.seed;
  return run;
}

// Paths given as flags are made absolute so they do not depend on the
// config file location.
std::optional<std::string> absolute_path(const std::optional<std::string>& p) {
  if (!p) return p;
  return fs::absolute(*p).lexically_normal().string();
}

template <typename T>
void set_if(json& cfg, const char* key, const std::optional<T>& value) {
  if (value) cfg[key] = *value;
}

ordered_json stamp(ordered_json j, const Run& run) {
  j["provenance"] = json(run.provenance);
  j["rng"] = std::string(kRngAlgorithm);
  return j;
}

std::string provenance_comment(const Run& run) {
  return "# tool=" + run.provenance.tool + " version=" + run.provenance.version +
         " config_hash=" + run.provenance.config_hash + " seed=" + std::to_string(run.seed) + "\n";
}

// ---------------------------------------------------------------- fit-affine

int cmd_fit_affine(const Run& run) {
  if (!run.cfg.contains("rpc")) throw Error(ErrorKind::kConfig, "fit-affine needs an rpc path");
  const RpcModel rpc = read_json_file(run.path("rpc")).get<RpcModel>();
  rpc.validate();
  const GeodeticPoint origin =
      run.cfg.contains("origin")
          ? GeodeticPoint::from_degrees(run.cfg["origin"].at("lon"), run.cfg["origin"].at("lat"),
                                        run.cfg["origin"].value("h", 0.0))
          : GeodeticPoint::from_degrees(rpc.lon_off, rpc.lat_off, rpc.h_off);
  const std::string kind = run.cfg.value("frame", std::string("tangent"));
  if (kind != "tangent" && kind != "linearized") throw Error(ErrorKind::kConfig, "frame must be tangent or linearized");
  const LocalFrame frame(origin, kind == "tangent" ? LocalFrame::Kind::kTangent : LocalFrame::Kind::kLinearized);

  Box3 tile;
  if (run.cfg.contains("tile")) {
    tile = run.cfg["tile"].get<Box3>();
  } else {
    const double half = 0.5 * kDefaultTileSize;
    const double hz = rpc.h_scale;
    tile = {Vec3(-half, -half, -hz), Vec3(half, half, hz)};
  }
  AffineFitOptions opts;
  opts.n_samples = run.cfg.value("n_samples", opts.n_samples);
  opts.seed = run.seed;
  const AffineFit fit = fit_affine_camera(rpc, tile, frame, opts);

  ordered_json j;
  j["camera"] = camera_to_json(fit.camera);
  j["frame"] = kind;
  j["rms_residual_px"] = fit.rms_residual_px;
  j["max_residual_px"] = fit.max_residual_px;
  j["n_samples"] = opts.n_samples;
  j["seed"] = run.seed;
  write_json_file(run.output("camera.json"), stamp(j, run));
  log("fit-affine: rms residual " + std::to_string(fit.rms_residual_px) + " px");
  return 0;
}

// ---------------------------------------------------------------- intersect

struct LoadedScene {
  SyntheticScene scene;
  SceneBundle bundle;
};

LoadedScene load_scene(const Run& run) {
  if (!run.cfg.contains("scene")) throw Error(ErrorKind::kConfig, "a scene is required (--scene or config 'scene')");
  LoadedScene ls;
  ls.scene = run.cfg["scene"].is_object() ? scene_from_json(run.cfg["scene"]) : read_scene(run.path("scene"));
  ls.bundle = make_ray_bundle(ls.scene);
  for (const auto& w : ls.bundle.warnings) log("warning: " + w);
  return ls;
}

// One draw of pose errors pushed through the Jacobian onto the ray origins.
std::vector<Vec3> sample_origins(const SceneBundle& sb, std::uint64_t seed) {
  const Eigen::MatrixXd map = sb.model.jacobian * symmetric_factor(sb.model.pose_covariance);
  Engine engine = make_engine(seed, 0);
  Eigen::VectorXd z(map.cols());
  for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = draw_normal(engine);
  const Eigen::VectorXd eps = map * z;
  std::vector<Vec3> origins;
  for (std::size_t i = 0; i < sb.model.bundle.rays.size(); ++i) {
    const Ray& r = sb.model.bundle.rays[i];
    origins.push_back(r.origin + eps[2 * i] * r.u_axis + eps[2 * i + 1] * r.v_axis);
  }
  return origins;
}

int cmd_intersect(const Run& run) {
  LoadedScene ls = load_scene(run);
  RayBundle bundle = ls.bundle.model.bundle;
  if (run.cfg.value("sample_errors", false)) {
    const auto origins = sample_origins(ls.bundle, run.seed);
    for (std::size_t i = 0; i < origins.size(); ++i) bundle.rays[i].origin = origins[i];
  }
  const bool weighted = run.cfg.value("weighted", true);
  const double confidence = run.cfg.value("confidence", 0.9);

  IntersectionResult result;
  if (weighted) {
    result = intersect_weighted(bundle);
  } else {
    const UnweightedIntersector solver(bundle.rays);
    const auto origins = bundle.origins();
    result.point = solver.solve(origins);
    result.covariance = solver.estimator_covariance(*bundle.ray_covariance);
    for (const auto& r : bundle.rays) result.distances.push_back(r.perpendicular_distance(result.point));
  }
  const ErrorEllipsoid ell = error_ellipsoid(result.covariance, confidence, result.point);
  ordered_json j = intersection_report(result, ell, run.seed, 0);
  j["weighting"] = weighted ? "covariance" : "none";
  j["truth_enu"] = vec_to_json(ls.scene.truth);
  j["truth_mahalanobis2"] = mahalanobis_squared(result.covariance, result.point, ls.scene.truth);
  j["condition_number"] = ls.bundle.condition_number;

  if (run.cfg.value("mig", false)) {
    // B = stacked plane rows, B_p = ray Jacobian with a zero kappa column,
    // Sigma_p = pose covariance including kappa.
    const auto n = static_cast<Eigen::Index>(bundle.rays.size());
    Eigen::MatrixXd b(2 * n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
      b.row(2 * i) = bundle.rays[i].u_axis.transpose();
      b.row(2 * i + 1) = bundle.rays[i].v_axis.transpose();
    }
    Eigen::MatrixXd bp = Eigen::MatrixXd::Zero(2 * n, 6 * n);
    Eigen::MatrixXd sp = Eigen::MatrixXd::Zero(6 * n, 6 * n);
    const Eigen::MatrixXd& jac = ls.bundle.model.jacobian;
    const Eigen::MatrixXd& s5 = ls.bundle.model.pose_covariance;
    for (Eigen::Index i = 0; i < n; ++i) {
      bp.block(2 * i, 6 * i, 2, 5) = jac.block(2 * i, 5 * i, 2, 5);
      for (Eigen::Index k = 0; k < n; ++k) sp.block(6 * i, 6 * k, 5, 5) = s5.block(5 * i, 5 * k, 5, 5);
      sp(6 * i + 5, 6 * i + 5) = ls.scene.images[i].errors.kappa_var;
    }
    const Eigen::MatrixXd p_mig = mig_covariance(b, bp, sp);
    const Mat3 pm = p_mig;
    j["P_mig"] = mat_to_json(pm);
    j["mig_relative_frobenius"] = relative_frobenius_error(pm, result.covariance);
  }
  write_json_file(run.output("intersection.json"), stamp(j, run));
  log("intersect: X = (" + std::to_string(result.point.x()) + ", " + std::to_string(result.point.y()) +
      ", " + std::to_string(result.point.z()) + ")");
  return 0;
}

// ---------------------------------------------------------------- montecarlo

int cmd_montecarlo(const Run& run) {
  LoadedScene ls = load_scene(run);
  MonteCarloOptions opts;
  opts.n_samples = run.cfg.value("n_samples", 100000);
  opts.seed = run.seed;
  opts.threads = run.threads;
  opts.weighted = run.cfg.value("weighted", false);
  const MonteCarloResult mc = monte_carlo_scatter(ls.bundle.model, opts);

  const auto& bundle = ls.bundle.model.bundle;
  const Mat3 analytic = opts.weighted ? WeightedIntersector(bundle.rays, *bundle.ray_covariance).covariance()
                                      : UnweightedIntersector(bundle.rays).estimator_covariance(*bundle.ray_covariance);
  {
    const auto path = run.output("scatter.csv");
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f) throw Error(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
    std::fputs(provenance_comment(run).c_str(), f);
    std::fputs("x,y,z\n", f);
    for (const Vec3& p : mc.points) std::fprintf(f, "%.17g,%.17g,%.17g\n", p.x(), p.y(), p.z());
    if (std::fclose(f) != 0) throw Error(ErrorKind::kIo, "write failed: " + path.string());
  }
  ordered_json j;
  j["n_samples"] = mc.n_samples;
  j["seed"] = mc.seed;
  j["weighted"] = mc.weighted;
  j["mean"] = vec_to_json(mc.mean);
  j["S_samp"] = mat_to_json(mc.sample_covariance);
  j["P_analytic"] = mat_to_json(analytic);
  j["relative_frobenius_error"] = relative_frobenius_error(mc.sample_covariance, analytic);
  write_json_file(run.output("montecarlo.json"), stamp(j, run));
  log("montecarlo: relative Frobenius error " + std::to_string(j["relative_frobenius_error"].get<double>()));
  return 0;
}

// ---------------------------------------------------------------- fuse

GridSpec grid_from_json(const json& g) {
  GridSpec s;
  s.x0 = g.at("origin_xy").at(0);
  s.y0 = g.at("origin_xy").at(1);
  s.spacing = g.at("spacing");
  s.width = g.at("width");
  s.height = g.at("height");
  s.validate();
  return s;
}

json grid_to_json(const GridSpec& g) {
  return {{"origin_xy", {g.x0, g.y0}}, {"spacing", g.spacing}, {"width", g.width}, {"height", g.height}};
}

int cmd_fuse(const Run& run) {
  if (!run.cfg.contains("clouds") || !run.cfg["clouds"].is_array() || run.cfg["clouds"].empty()) {
    throw Error(ErrorKind::kConfig, "fuse needs a nonempty 'clouds' list");
  }
  std::vector<StereoCloud> clouds;
  for (const auto& entry : run.cfg["clouds"]) {
    fs::path p = entry.get<std::string>();
    if (!p.is_absolute()) p = run.config_dir / p;
    clouds.push_back(read_cloud(p));
  }
  GridSpec grid;
  if (run.cfg.contains("grid")) {
    grid = grid_from_json(run.cfg["grid"]);
  } else {
    const double spacing = run.cfg.value("spacing", 0.5);
    double xmin = INFINITY, ymin = INFINITY, xmax = -INFINITY, ymax = -INFINITY;
    for (const auto& c : clouds) {
      for (const auto& pt : c.points) {
        xmin = std::min(xmin, pt.x);
        xmax = std::max(xmax, pt.x);
        ymin = std::min(ymin, pt.y);
        ymax = std::max(ymax, pt.y);
      }
    }
    grid = GridSpec::covering(std::floor(xmin / spacing) * spacing, std::floor(ymin / spacing) * spacing,
                              std::ceil(xmax / spacing) * spacing, std::ceil(ymax / spacing) * spacing, spacing);
  }
  FusionOptions opts;
  opts.radius = run.cfg.value("radius", 0.0);
  opts.k_max = run.cfg.value("k_max", opts.k_max);
  opts.tolerance = run.cfg.value("tol", opts.tolerance);
  opts.min_pairs = run.cfg.value("min_pairs", opts.min_pairs);
  opts.median = run.cfg.value("median", false);
  opts.threads = run.threads;
  const DsmGrid dsm = fuse_dsm(clouds, grid, opts);

  const bool ascii = run.cfg.value("ascii", false);
  auto emit = [&](const Raster& r, Layer layer) {
    write_raster(run.output(to_string(layer)), r, layer, run.provenance);
    if (ascii) write_ascii_grid(run.output(to_string(layer) + ".asc"), r);
  };
  emit(dsm.z, Layer::kZ);
  emit(dsm.sigma_z, Layer::kSigmaZ);
  emit(dsm.sigma_h, Layer::kSigmaH);
  emit(dsm.pbar, Layer::kPbar);
  if (dsm.median_z) emit(*dsm.median_z, Layer::kMedianZ);

  std::size_t low = 0;
  for (auto f : dsm.low_confidence) low += f;
  ordered_json j;
  j["grid"] = grid_to_json(grid);
  j["clouds"] = clouds.size();
  j["valid_cells"] = dsm.z.valid_count();
  j["low_confidence_cells"] = low;
  j["radius"] = opts.radius > 0.0 ? opts.radius : grid.spacing;
  j["k_max"] = opts.k_max;
  j["tol"] = opts.tolerance;
  write_json_file(run.output("fuse.json"), stamp(j, run));
  log("fuse: " + std::to_string(dsm.z.valid_count()) + " valid cells");
  return 0;
}

// ---------------------------------------------------------------- evaluate

Raster load_layer(const fs::path& base, Layer expected) {
  LoadedRaster lr = read_raster(base);
  if (lr.layer != expected) {
    throw Error(ErrorKind::kConfig, base.string() + ": expected layer " + to_string(expected) + ", found " +
                                        to_string(lr.layer));
  }
  return std::move(lr.raster);
}

ordered_json summary_json(const NdistSummary& s) {
  ordered_json j;
  j["valid"] = s.valid;
  j["within_1"] = s.within_1;
  j["within_1.644"] = s.within_le90;
  j["fraction_within_1"] = s.fraction_within_1;
  j["fraction_within_1.644"] = s.fraction_within_le90;
  return j;
}

int cmd_evaluate(const Run& run) {
  if (!run.cfg.contains("dsm") || !run.cfg.contains("gt")) throw Error(ErrorKind::kConfig, "evaluate needs 'dsm' and 'gt'");
  const fs::path dsm = run.path("dsm");
  const Raster z = load_layer(dsm / "z", Layer::kZ);
  const Raster sz = load_layer(dsm / "sigma_z", Layer::kSigmaZ);
  LoadedRaster gt = read_raster(run.path("gt"));
  const Raster nd = normalized_distance(z, sz, gt.raster);
  write_raster(run.output("ndist"), nd, Layer::kNdist, run.provenance);

  ordered_json j;
  j["plain"] = summary_json(summarize(nd));
  if (run.cfg.value("neighborhood", true)) {
    const Raster sh = load_layer(dsm / "sigma_h", Layer::kSigmaH);
    const double s_gt = run.cfg.value("s_gt", gt.raster.spec.spacing);
    const Raster radius = h90_radius(sh, s_gt);
    const Raster ndn = neighborhood_normalized_distance(z, sz, gt.raster, radius);
    write_raster(run.output("ndist_h90"), ndn, Layer::kNdist, run.provenance);
    j["neighborhood"] = summary_json(summarize(ndn));
    j["s_gt"] = s_gt;
  }
  write_json_file(run.output("evaluation.json"), stamp(j, run));
  log("evaluate: fraction within 1.644 sigma " + std::to_string(j["plain"]["fraction_within_1.644"].get<double>()));
  return 0;
}

// ---------------------------------------------------------------- tv

int cmd_tv(const Run& run) {
  if (!run.cfg.contains("disparity")) throw Error(ErrorKind::kConfig, "tv needs a 'disparity' raster");
  const LoadedRaster in = read_raster(run.path("disparity"));
  const GridSpec& g = in.raster.spec;
  DisparityGrid d(g.width, g.height);
  d.d = in.raster.values;
  const double theta = run.cfg.value("theta", 2.0);
  const int n_max = run.cfg.value("n_max", 10);
  const ClassGrid classes = tv_class(d, theta, n_max);

  Raster cls(g);
  for (std::size_t k = 0; k < cls.values.size(); ++k) {
    if (classes.classes[k] != kInvalidClass) cls.values[k] = classes.classes[k];
  }
  write_raster(run.output("tv_class"), cls, Layer::kTvClass, run.provenance);

  ordered_json j;
  j["theta"] = theta;
  j["n_max"] = n_max;
  if (run.cfg.contains("calibration")) {
    TvCalibration cal;
    run.cfg["calibration"].at("classes").get_to(cal.classes);
    run.cfg["calibration"].at("sigma").get_to(cal.sigma);
    cal.validate();
    Raster sigma(g);
    sigma.values = tv_to_sigma(classes, cal);
    write_raster(run.output("sigma_disp"), sigma, Layer::kSigmaDisp, run.provenance);
    j["calibration"] = run.cfg["calibration"];
  }
  std::vector<std::size_t> histogram(n_max + 1, 0);
  for (int c : classes.classes) {
    if (c != kInvalidClass) ++histogram[c];
  }
  j["class_histogram"] = histogram;
  write_json_file(run.output("tv.json"), stamp(j, run));
  return 0;
}

// ---------------------------------------------------------------- simulate

StereoCloudOptions cloud_options(const json& c, std::uint64_t seed) {
  StereoCloudOptions o;
  if (c.contains("extent")) {
    const auto& e = c["extent"];
    o.xmin = e.at("x").at(0);
    o.xmax = e.at("x").at(1);
    o.ymin = e.at("y").at(0);
    o.ymax = e.at("y").at(1);
  }
  o.lattice = c.value("lattice", o.lattice);
  o.jitter = c.value("jitter", o.jitter);
  o.n_pairs = c.value("n_pairs", o.n_pairs);
  o.sigma_xy = c.value("sigma_xy", o.sigma_xy);
  o.sigma_z = c.value("sigma_z", o.sigma_z);
  o.outlier_rate = c.value("outlier_rate", o.outlier_rate);
  if (c.contains("outlier_z")) o.outlier_z = c["outlier_z"].get<double>();
  o.outlier_range = c.value("outlier_range", o.outlier_range);
  o.outlier_p = c.value("outlier_p", o.outlier_p);
  o.match_scale = c.value("match_scale", o.match_scale);
  o.occlusion_width = c.value("occlusion_width", o.occlusion_width);
  o.occlusion_drop = c.value("occlusion_drop", o.occlusion_drop);
  o.seed = seed;
  return o;
}

ImagePoseSpec pose_from_json(const json& p) {
  ImagePoseSpec pose;
  pose.id = p.value("id", std::string("image"));
  pose.azimuth = deg_to_rad(p.at("azimuth_deg").get<double>());
  pose.elevation = deg_to_rad(p.at("elevation_deg").get<double>());
  pose.altitude = p.value("altitude_m", kDefaultAltitude);
  pose.inclination = deg_to_rad(p.value("inclination_deg", 97.7783));
  pose.scan_theta = deg_to_rad(p.value("scan_theta_deg", -90.0));
  pose.origin = GeodeticPoint::from_degrees(p.at("origin").at("lon"), p.at("origin").at("lat"),
                                            p.at("origin").value("h", 0.0));
  return pose;
}

int cmd_simulate(const Run& run) {
  const json& cfg = run.cfg;
  bool produced = false;

  if (cfg.contains("site") || cfg.contains("random_scene")) {
    SyntheticScene scene;
    if (cfg.contains("site")) {
      scene = site_scene(site_from_string(cfg["site"].get<std::string>()));
    } else {
      const json& r = cfg["random_scene"];
      RandomSceneOptions o;
      o.pass_sizes = r.value("pass_sizes", o.pass_sizes);
      if (r.contains("sensors")) {
        o.sensors.clear();
        for (const auto& s : r["sensors"]) o.sensors.push_back(sensor_from_string(s.get<std::string>()));
      }
      o.rho = r.value("rho", o.rho);
      o.seed = run.seed;
      scene = random_scene(o);
    }
    if (cfg.contains("truth_enu")) {
      scene.truth = Vec3(cfg["truth_enu"].at(0), cfg["truth_enu"].at(1), cfg["truth_enu"].at(2));
    }
    scene.seed = run.seed;
    write_json_file(run.output("scene.json"), stamp(scene_to_json(scene), run));
    produced = true;
  }

  if (cfg.contains("clouds")) {
    const json& c = cfg["clouds"];
    const SurfacePtr surface = surface_from_json(cfg.at("surface"));
    const StereoCloudOptions o = cloud_options(c, run.seed);
    const auto clouds = make_stereo_clouds(*surface, o);
    const fs::path dir = run.output("clouds");
    fs::create_directories(dir);
    ordered_json manifest;
    manifest["surface"] = surface->to_json();
    manifest["clouds"] = json::array();
    const bool csv = c.value("csv", false);
    for (const auto& cloud : clouds) {
      const std::string name = cloud.pair_id + (csv ? ".csv" : ".bin");
      if (csv) {
        write_cloud_csv(dir / name, cloud);
      } else {
        write_cloud_binary(dir / name, cloud);
      }
      manifest["clouds"].push_back("clouds/" + name);
    }
    // Ground truth sampled at the DSM cell centers.
    if (c.contains("gt_grid")) {
      const GridSpec g = grid_from_json(c["gt_grid"]);
      Raster gt(g);
      for (int row = 0; row < g.height; ++row) {
        for (int col = 0; col < g.width; ++col) {
          const Vec2 p = g.cell_center(col, row);
          gt.at(col, row) = surface->height(p.x(), p.y());
        }
      }
      write_raster(run.output("gt"), gt, Layer::kGroundTruth, run.provenance);
      manifest["gt"] = "gt";
    }
    write_json_file(run.output("clouds.json"), stamp(manifest, run));
    produced = true;
  }

  if (cfg.contains("rpc")) {
    const json& r = cfg["rpc"];
    const ImagePoseSpec pose = pose_from_json(r.at("pose"));
    Box3 tile{Vec3(-250, -250, -50), Vec3(250, 250, 50)};
    if (r.contains("tile")) tile = r["tile"].get<Box3>();
    PushbroomOptions o;
    o.gsd = r.value("gsd", o.gsd);
    o.perturbation_px = r.value("perturbation_px", o.perturbation_px);
    const RpcModel rpc = make_pushbroom_rpc(pose, tile, o);
    ordered_json j = json(rpc);
    write_json_file(run.output("rpc.json"), stamp(j, run));
    produced = true;
  }

  if (cfg.contains("disparity")) {
    // Ramp plus Gaussian noise whose amplitude grows from the left edge to
    // the right edge.
    const json& d = cfg["disparity"];
    GridSpec g;
    g.width = d.value("width", 64);
    g.height = d.value("height", 64);
    g.spacing = 1.0;
    g.x0 = 0.0;
    g.y0 = g.height;
    const double slope = d.value("slope", 0.1);
    const double noise = d.value("noise", 1.0);
    Engine engine = make_engine(run.seed, 0);
    Raster r(g);
    for (int row = 0; row < g.height; ++row) {
      for (int col = 0; col < g.width; ++col) {
        const double amp = noise * col / std::max(1, g.width - 1);
        r.at(col, row) = slope * col + amp * draw_normal(engine);
      }
    }
    write_raster(run.output("disparity"), r, Layer::kDisparity, run.provenance);
    produced = true;
  }

  if (!produced) {
    throw Error(ErrorKind::kConfig, "simulate needs one of: site, random_scene, clouds, rpc, disparity");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Satellite multi-image geolocation error prediction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", common.out, "Output directory");
    sub->add_option("--seed", common.seed, "Random seed (U64)");
    sub->add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber);
  };

  std::function<int()> action;

  auto* fit = app.add_subcommand("fit-affine", "Fit a per-tile affine camera to an RPC");
  add_common(fit);
  std::optional<std::string> rpc_path;
  std::optional<int> fit_samples;
  fit->add_option("--rpc", rpc_path, "RPC JSON file");
  fit->add_option("--n-samples", fit_samples, "Correspondences sampled in the tile");
  fit->callback([&] {
    action = [&] {
      return cmd_fit_affine(make_run(common, [&](json& c) {
        set_if(c, "rpc", absolute_path(rpc_path));
        set_if(c, "n_samples", fit_samples);
      }));
    };
  });

  std::optional<std::string> scene_path;
  std::optional<double> confidence;

  auto* isect = app.add_subcommand("intersect", "Covariance-weighted ray intersection");
  add_common(isect);
  bool no_weights = false, mig = false, sample_errors = false;
  isect->add_option("--scene", scene_path, "Scene JSON file");
  isect->add_option("--confidence", confidence, "Ellipsoid confidence");
  isect->add_flag("--no-weights", no_weights, "Unweighted intersection");
  isect->add_flag("--mig", mig, "Also report the MIG covariance");
  isect->add_flag("--sample-errors", sample_errors, "Perturb the rays with one seeded pose-error draw");
  isect->callback([&] {
    action = [&] {
      return cmd_intersect(make_run(common, [&](json& c) {
        set_if(c, "scene", absolute_path(scene_path));
        set_if(c, "confidence", confidence);
        if (no_weights) c["weighted"] = false;
        if (mig) c["mig"] = true;
        if (sample_errors) c["sample_errors"] = true;
      }));
    };
  });

  auto* mc = app.add_subcommand("montecarlo", "Monte Carlo scatter of intersections under pose error");
  add_common(mc);
  std::optional<int> mc_samples;
  bool mc_weighted = false;
  mc->add_option("--scene", scene_path, "Scene JSON file");
  mc->add_option("--n-samples", mc_samples, "Number of samples (default 100000)");
  mc->add_flag("--weighted", mc_weighted, "Intersect samples with covariance weighting");
  mc->callback([&] {
    action = [&] {
      return cmd_montecarlo(make_run(common, [&](json& c) {
        set_if(c, "scene", absolute_path(scene_path));
        set_if(c, "n_samples", mc_samples);
        if (mc_weighted) c["weighted"] = true;
      }));
    };
  });

  auto* fuse = app.add_subcommand("fuse", "Fuse stereo point clouds into a DSM with error layers");
  add_common(fuse);
  std::vector<std::string> cloud_paths;
  std::optional<double> tol, radius, spacing;
  std::optional<int> k_max;
  bool median = false, ascii = false;
  fuse->add_option("--cloud", cloud_paths, "Point cloud file (repeatable)");
  fuse->add_option("--tol", tol, "Consensus tolerance (m)");
  fuse->add_option("--radius", radius, "Binning radius (m)");
  fuse->add_option("--k-max", k_max, "Neighbors per cell");
  fuse->add_option("--spacing", spacing, "Grid spacing when no grid is configured");
  fuse->add_flag("--median", median, "Also emit the median-fused layer");
  fuse->add_flag("--ascii", ascii, "Also write ESRI ASCII grids");
  fuse->callback([&] {
    action = [&] {
      return cmd_fuse(make_run(common, [&](json& c) {
        if (!cloud_paths.empty()) {
          json list = json::array();
          for (const auto& p : cloud_paths) list.push_back(*absolute_path(p));
          c["clouds"] = list;
        }
        set_if(c, "tol", tol);
        set_if(c, "radius", radius);
        set_if(c, "k_max", k_max);
        set_if(c, "spacing", spacing);
        if (median) c["median"] = true;
        if (ascii) c["ascii"] = true;
      }));
    };
  });

  auto* eval = app.add_subcommand("evaluate", "Normalized distance of a DSM against ground truth");
  add_common(eval);
  std::optional<std::string> dsm_dir, gt_path;
  std::optional<double> s_gt;
  bool no_neighborhood = false;
  eval->add_option("--dsm", dsm_dir, "Directory written by fuse");
  eval->add_option("--gt", gt_path, "Ground-truth raster base path");
  eval->add_option("--s-gt", s_gt, "Ground-truth sample spacing (m)");
  eval->add_flag("--no-neighborhood", no_neighborhood, "Skip the r_h90 neighborhood evaluation");
  eval->callback([&] {
    action = [&] {
      return cmd_evaluate(make_run(common, [&](json& c) {
        set_if(c, "dsm", absolute_path(dsm_dir));
        set_if(c, "gt", absolute_path(gt_path));
        set_if(c, "s_gt", s_gt);
        if (no_neighborhood) c["neighborhood"] = false;
      }));
    };
  });

  auto* tv = app.add_subcommand("tv", "Total-variation classes of a disparity raster");
  add_common(tv);
  std::optional<std::string> disparity;
  std::optional<double> theta;
  std::optional<int> n_max;
  tv->add_option("--disparity", disparity, "Disparity raster base path");
  tv->add_option("--theta", theta, "Cumulative TV threshold");
  tv->add_option("--n-max", n_max, "Number of rings");
  tv->callback([&] {
    action = [&] {
      return cmd_tv(make_run(common, [&](json& c) {
        set_if(c, "disparity", absolute_path(disparity));
        set_if(c, "theta", theta);
        set_if(c, "n_max", n_max);
      }));
    };
  });

  auto* sim = app.add_subcommand("simulate", "Generate synthetic scenes, clouds, RPCs and disparities");
  add_common(sim);
  std::optional<std::string> site;
  sim->add_option("--site", site, "Site template: buenos-aires, wpafb, richmond, kandahar");
  sim->callback([&] {
    action = [&] {
      return cmd_simulate(make_run(common, [&](json& c) { set_if(c, "site", site); }));
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return action();
  } catch (const Error& e) {
    log("error (" + std::string(to_string(e.kind())) + "): " + e.what());
    return e.exit_code();
  } catch (const nlohmann::json::exception& e) {
    log(std::string("configuration error: ") + e.what());
    return 2;
  } catch (const fs::filesystem_error& e) {
    log(std::string("I/O error: ") + e.what());
    return 2;
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return 1;
  }
}
