#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace satgeo {

// Every stochastic routine draws from an mt19937_64 engine seeded through
// splitmix64 from (seed, stream). Distributions come from Boost.Random,
// whose algorithms are fixed across platforms (unlike <random>'s).
inline constexpr std::string_view kRngAlgorithm =
    "mt19937_64+splitmix64(seed,stream)+boost.random";

using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Independent engine for substream `stream` of `seed`. Monte Carlo uses the
// sample index as the stream so results do not depend on thread layout.
Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0);

double draw_uniform(Engine& engine, double lo, double hi);
double draw_normal(Engine& engine, double mean = 0.0, double sigma = 1.0);

}  // namespace satgeo
