#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"

namespace satgeo {

inline constexpr std::string_view kToolName = "satgeo";
inline constexpr std::string_view kToolVersion = "0.1.0";

// Stamped into every file the CLI writes.
struct Provenance {
  std::string tool{kToolName};
  std::string version{kToolVersion};
  std::string config_hash;
  std::uint64_t seed = 0;
};

void to_json(nlohmann::json& j, const Provenance& p);
void from_json(const nlohmann::json& j, Provenance& p);

// FNV-1a 64 of `text`, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view text);

}  // namespace satgeo
