#include "satgeo/rpc.h"

#include <cmath>

#include "json.hpp"

#include "satgeo/error.h"

namespace satgeo {
namespace {

constexpr double kSingularDenominator = 1e-12;
constexpr double kValidityWindow = 1.5;

double dot(const RpcModel::Coeffs& a, const RpcModel::Coeffs& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

void RpcModel::validate() const {
  for (double s : {lon_scale, lat_scale, h_scale, line_scale, samp_scale}) {
    if (!(s > 0.0)) throw Error(ErrorKind::kDomain, "RPC scale must be positive");
  }
  if (line_den[0] == 0.0 || samp_den[0] == 0.0) {
    throw Error(ErrorKind::kDomain, "RPC denominator constant coefficient is zero");
  }
}

Vec3 RpcModel::normalize(const GeodeticPoint& p) const {
  return {(p.lon_deg() - lon_off) / lon_scale, (p.lat_deg() - lat_off) / lat_scale,
          (p.h - h_off) / h_scale};
}

bool RpcModel::in_validity_window(const GeodeticPoint& p) const {
  return (normalize(p).array().abs() <= kValidityWindow).all();
}

RpcModel::Coeffs RpcModel::terms(const Vec3& n) {
  const double l = n.x(), p = n.y(), h = n.z();
  return {1.0,       l,         p,         h,         l * p,
          l * h,     p * h,     l * l,     p * p,     h * h,
          p * l * h, l * l * l, l * p * p, l * h * h, l * l * p,
          p * p * p, p * h * h, l * l * h, p * p * h, h * h * h};
}

PixelCoord rpc_project(const RpcModel& m, const GeodeticPoint& p) {
  const auto t = RpcModel::terms(m.normalize(p));
  const double line_den = dot(t, m.line_den);
  const double samp_den = dot(t, m.samp_den);
  if (std::abs(line_den) < kSingularDenominator || std::abs(samp_den) < kSingularDenominator) {
    throw Error(ErrorKind::kProjectionSingular, "RPC denominator vanishes at the query point");
  }
  return {dot(t, m.line_num) / line_den * m.line_scale + m.line_off,
          dot(t, m.samp_num) / samp_den * m.samp_scale + m.samp_off};
}

void to_json(nlohmann::json& j, const RpcModel& m) {
  j = nlohmann::json{{"line_off", m.line_off},         {"samp_off", m.samp_off},
                     {"lat_off", m.lat_off},           {"long_off", m.lon_off},
                     {"height_off", m.h_off},          {"line_scale", m.line_scale},
                     {"samp_scale", m.samp_scale},     {"lat_scale", m.lat_scale},
                     {"long_scale", m.lon_scale},      {"height_scale", m.h_scale},
                     {"line_num_coeff", m.line_num},   {"line_den_coeff", m.line_den},
                     {"samp_num_coeff", m.samp_num},   {"samp_den_coeff", m.samp_den}};
}

void from_json(const nlohmann::json& j, RpcModel& m) {
  try {
    j.at("line_off").get_to(m.line_off);
    j.at("samp_off").get_to(m.samp_off);
    j.at("lat_off").get_to(m.lat_off);
    j.at("long_off").get_to(m.lon_off);
    j.at("height_off").get_to(m.h_off);
    j.at("line_scale").get_to(m.line_scale);
    j.at("samp_scale").get_to(m.samp_scale);
    j.at("lat_scale").get_to(m.lat_scale);
    j.at("long_scale").get_to(m.lon_scale);
    j.at("height_scale").get_to(m.h_scale);
    j.at("line_num_coeff").get_to(m.line_num);
    j.at("line_den_coeff").get_to(m.line_den);
    j.at("samp_num_coeff").get_to(m.samp_num);
    j.at("samp_den_coeff").get_to(m.samp_den);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("malformed RPC document: ") + e.what());
  }
  m.validate();
}

}  // namespace satgeo
