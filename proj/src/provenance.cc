#include "satgeo/provenance.h"

#include <cstdio>

namespace satgeo {

void to_json(nlohmann::json& j, const Provenance& p) {
  j = nlohmann::json{{"tool", p.tool},
                     {"version", p.version},
                     {"config_hash", p.config_hash},
                     {"seed", p.seed}};
}

void from_json(const nlohmann::json& j, Provenance& p) {
  j.at("tool").get_to(p.tool);
  j.at("version").get_to(p.version);
  j.at("config_hash").get_to(p.config_hash);
  j.at("seed").get_to(p.seed);
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace satgeo
