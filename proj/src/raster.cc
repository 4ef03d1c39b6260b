#include "satgeo/raster.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "binary_io.h"
#include "satgeo/error.h"

namespace satgeo {

namespace {

constexpr std::pair<Layer, const char*> kLayerNames[] = {
    {Layer::kZ, "z"},
    {Layer::kSigmaZ, "sigma_z"},
    {Layer::kSigmaH, "sigma_h"},
    {Layer::kPbar, "pbar"},
    {Layer::kNdist, "ndist"},
    {Layer::kTvClass, "tv_class"},
    {Layer::kSigmaDisp, "sigma_disp"},
    {Layer::kDisparity, "disparity"},
    {Layer::kMedianZ, "median_z"},
    {Layer::kGroundTruth, "gt"},
};

std::filesystem::path with_suffix(const std::filesystem::path& base, const char* suffix) {
  return std::filesystem::path(base.string() + suffix);
}

}  // namespace

void GridSpec::validate() const {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw Error(ErrorKind::kDomain, "grid spacing must be positive");
  if (width <= 0 || height <= 0) throw Error(ErrorKind::kDomain, "grid size must be positive");
  if (!std::isfinite(x0) || !std::isfinite(y0)) throw Error(ErrorKind::kDomain, "grid origin must be finite");
}

GridSpec GridSpec::covering(double xmin, double ymin, double xmax, double ymax, double spacing) {
  GridSpec g;
  g.spacing = spacing;
  g.x0 = xmin;
  g.y0 = ymax;
  g.width = std::max(1, static_cast<int>(std::ceil((xmax - xmin) / spacing - 1e-9)));
  g.height = std::max(1, static_cast<int>(std::ceil((ymax - ymin) / spacing - 1e-9)));
  g.validate();
  return g;
}

std::string to_string(Layer layer) {
  for (const auto& [l, name] : kLayerNames) {
    if (l == layer) return name;
  }
  return "unknown";
}

Layer layer_from_string(const std::string& name) {
  for (const auto& [l, n] : kLayerNames) {
    if (name == n) return l;
  }
  throw Error(ErrorKind::kConfig, "unknown raster layer '" + name + "'");
}

std::size_t Raster::valid_count() const {
  return static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [](double v) { return !std::isnan(v); }));
}

void write_raster(const std::filesystem::path& base, const Raster& raster, Layer layer,
                  const Provenance& provenance) {
  const GridSpec& g = raster.spec;
  g.validate();
  if (raster.values.size() != g.size()) throw Error(ErrorKind::kDomain, "raster size mismatch");

  const auto payload = with_suffix(base, ".f32");
  std::ofstream out(payload, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + payload.string() + " for writing");
  for (double v : raster.values) {
    detail::write_le(out, static_cast<float>(std::isnan(v) ? kNoData : v));
  }
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + payload.string());

  nlohmann::ordered_json sidecar;
  sidecar["origin_xy"] = {g.x0, g.y0};
  sidecar["spacing"] = g.spacing;
  sidecar["width"] = g.width;
  sidecar["height"] = g.height;
  sidecar["nodata"] = kNoData;
  sidecar["layer"] = to_string(layer);
  sidecar["payload"] = payload.filename().string();
  sidecar["provenance"] = nlohmann::json(provenance);
  const auto meta = with_suffix(base, ".json");
  std::ofstream mout(meta);
  if (!mout) throw Error(ErrorKind::kIo, "cannot open " + meta.string() + " for writing");
  mout << sidecar.dump(2) << '\n';
}

LoadedRaster read_raster(const std::filesystem::path& base) {
  const auto meta = with_suffix(base, ".json");
  std::ifstream min(meta);
  if (!min) throw Error(ErrorKind::kIo, "cannot open " + meta.string());
  LoadedRaster out;
  try {
    const auto j = nlohmann::json::parse(min);
    GridSpec g;
    g.x0 = j.at("origin_xy").at(0).get<double>();
    g.y0 = j.at("origin_xy").at(1).get<double>();
    g.spacing = j.at("spacing").get<double>();
    g.width = j.at("width").get<int>();
    g.height = j.at("height").get<int>();
    g.validate();
    out.layer = layer_from_string(j.at("layer").get<std::string>());
    if (j.contains("provenance")) out.provenance = j.at("provenance").get<Provenance>();
    out.raster = Raster(g);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, meta.string() + ": " + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kDomain) throw Error(ErrorKind::kConfig, meta.string() + ": " + e.what());
    throw;
  }

  const auto payload = with_suffix(base, ".f32");
  std::ifstream in(payload, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + payload.string());
  for (double& v : out.raster.values) {
    float f;
    if (!detail::read_le(in, f)) throw Error(ErrorKind::kIo, payload.string() + ": truncated payload");
    v = (f == static_cast<float>(kNoData)) ? std::numeric_limits<double>::quiet_NaN() : f;
  }
  return out;
}

void write_ascii_grid(const std::filesystem::path& path, const Raster& raster) {
  const GridSpec& g = raster.spec;
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw Error(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  std::fprintf(f, "ncols %d\nnrows %d\nxllcorner %.6f\nyllcorner %.6f\ncellsize %.6f\nNODATA_value %.1f\n",
               g.width, g.height, g.x0, g.y0 - g.height * g.spacing, g.spacing, kNoData);
  for (int row = 0; row < g.height; ++row) {
    for (int col = 0; col < g.width; ++col) {
      const double v = raster.at(col, row);
      std::fprintf(f, col ? " %.6g" : "%.6g", std::isfinite(v) ? v : kNoData);
    }
    std::fputc('\n', f);
  }
  if (std::fclose(f) != 0) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

}  // namespace satgeo
