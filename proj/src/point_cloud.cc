#include "satgeo/point_cloud.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "binary_io.h"
#include "json.hpp"
#include "satgeo/error.h"

namespace satgeo {

void StereoCloud::validate() const {
  if (points.empty()) throw Error(ErrorKind::kDomain, "stereo cloud '" + pair_id + "' is empty");
  for (const auto& pt : points) {
    if (!std::isfinite(pt.x) || !std::isfinite(pt.y) || !std::isfinite(pt.z)) {
      throw Error(ErrorKind::kDomain, "stereo cloud '" + pair_id + "' has a non-finite point");
    }
    if (!(pt.p > 0.0 && pt.p <= 1.0)) {
      throw Error(ErrorKind::kDomain, "stereo cloud '" + pair_id + "' has a probability outside (0, 1]");
    }
  }
}

namespace {

StereoCloud validated(StereoCloud cloud, const std::filesystem::path& path) {
  try {
    cloud.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::kConfig, path.string() + ": " + e.what());
  }
  return cloud;
}

}  // namespace

void write_cloud_binary(const std::filesystem::path& path, const StereoCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  nlohmann::ordered_json header;
  header["pair_id"] = cloud.pair_id;
  header["count"] = cloud.points.size();
  header["frame"] = cloud.frame;
  out << header.dump() << '\n';
  for (const auto& pt : cloud.points) {
    detail::write_le(out, pt.x);
    detail::write_le(out, pt.y);
    detail::write_le(out, pt.z);
    detail::write_le(out, pt.p);
  }
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

StereoCloud read_cloud_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::kIo, path.string() + ": missing header");
  StereoCloud cloud;
  std::size_t count = 0;
  try {
    const auto header = nlohmann::json::parse(line);
    header.at("pair_id").get_to(cloud.pair_id);
    header.at("count").get_to(count);
    cloud.frame = header.value("frame", cloud.frame);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, path.string() + ": bad header: " + e.what());
  }
  cloud.points.resize(count);
  for (auto& pt : cloud.points) {
    if (!(detail::read_le(in, pt.x) && detail::read_le(in, pt.y) && detail::read_le(in, pt.z) &&
          detail::read_le(in, pt.p))) {
      throw Error(ErrorKind::kIo, path.string() + ": truncated record stream");
    }
  }
  return validated(std::move(cloud), path);
}

void write_cloud_csv(const std::filesystem::path& path, const StereoCloud& cloud) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw Error(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  std::fputs("x,y,z,p\n", f);
  for (const auto& pt : cloud.points) {
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g\n", pt.x, pt.y, pt.z, pt.p);
  }
  if (std::fclose(f) != 0) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

StereoCloud read_cloud_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  StereoCloud cloud;
  cloud.pair_id = path.stem().string();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (line_no == 1 && line.rfind("x", 0) == 0)) continue;
    double v[4];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int k = 0; k < 4; ++k) {
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      const auto [next, ec] = std::from_chars(p, end, v[k]);
      if (ec != std::errc()) {
        throw Error(ErrorKind::kConfig, path.string() + ":" + std::to_string(line_no) + ": bad number");
      }
      p = next;
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      if (k < 3) {
        if (p == end || *p != ',') {
          throw Error(ErrorKind::kConfig, path.string() + ":" + std::to_string(line_no) + ": expected 4 columns");
        }
        ++p;
      }
    }
    cloud.points.push_back({v[0], v[1], v[2], v[3]});
  }
  return validated(std::move(cloud), path);
}

StereoCloud read_cloud(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? read_cloud_csv(path) : read_cloud_binary(path);
}

}  // namespace satgeo
