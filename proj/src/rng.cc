#include "satgeo/rng.h"

#include <array>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace satgeo {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Engine make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = splitmix64(seed) ^ splitmix64(~stream);
  std::array<std::uint32_t, 8> words{};
  for (auto& w : words) {
    state = splitmix64(state);
    w = static_cast<std::uint32_t>(state >> 32);
  }
  std::seed_seq seq(words.begin(), words.end());
  return Engine(seq);
}

double draw_uniform(Engine& engine, double lo, double hi) {
  // Boost rejects draws equal to hi, so a zero-width range never returns.
  if (!(hi > lo)) {
    engine();
    return lo;
  }
  boost::random::uniform_real_distribution<double> dist(lo, hi);
  return dist(engine);
}

double draw_normal(Engine& engine, double mean, double sigma) {
  boost::random::normal_distribution<double> dist(mean, sigma);
  return dist(engine);
}

}  // namespace satgeo
