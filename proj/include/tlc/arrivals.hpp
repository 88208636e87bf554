#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "tlc/errors.hpp"

namespace tlc {

// Mixes a run seed with a stream id so each road gets an independent,
// reproducible generator.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), 0x7e11u};
  return std::mt19937_64(seq);
}

// Poisson arrival epochs in [0, horizon).
inline std::vector<double> generate_arrivals(double rate, double horizon, std::uint64_t seed,
                                             std::uint64_t stream = 0) {
  if (!(rate >= 0.0)) throw ConfigError("arrival rate must be >= 0");
  if (!(horizon > 0.0)) throw ConfigError("horizon must be > 0");
  std::vector<double> times;
  if (rate == 0.0) return times;
  auto rng = make_stream(seed, stream);
  std::exponential_distribution<double> gap(rate);
  double t = gap(rng);
  while (t < horizon) {
    times.push_back(t);
    double next = t + gap(rng);
    // Guard against a zero draw collapsing two epochs.
    if (next <= t) next = std::nextafter(t, horizon + 1.0);
    t = next;
  }
  return times;
}

}  // namespace tlc
