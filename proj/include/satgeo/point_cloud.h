#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace satgeo {

// A stereo point with its forward/reverse consistency probability.
struct WeightedPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double p = 1.0;  // in (0, 1]
};

struct StereoCloud {
  std::string pair_id;
  std::string frame = "local-enu";
  std::vector<WeightedPoint> points;

  // Throws kDomain for an empty cloud, a non-finite coordinate or p outside
  // (0, 1].
  void validate() const;
};

// Binary layout: one line of JSON {pair_id, count, frame} terminated by '\n',
// then `count` records of little-endian float64 x, y, z, p.
void write_cloud_binary(const std::filesystem::path& path, const StereoCloud& cloud);
StereoCloud read_cloud_binary(const std::filesystem::path& path);

// CSV with header "x,y,z,p". The pair id is taken from the file stem.
void write_cloud_csv(const std::filesystem::path& path, const StereoCloud& cloud);
StereoCloud read_cloud_csv(const std::filesystem::path& path);

// Dispatches on the ".csv" extension. Readers validate, so points with
// p <= 0 are rejected at ingestion (kConfig); missing files raise kIo.
StereoCloud read_cloud(const std::filesystem::path& path);

}  // namespace satgeo
