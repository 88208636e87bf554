#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "tlc/errors.hpp"

namespace tlc {

inline constexpr int kRoads = 4;
// Roads 1..4 occupy indices 0..3; the transit queue 12 is re-indexed as the
// fifth queue.
inline constexpr int kQueues = 5;
inline constexpr int kTransit = 4;
inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

using Vec4 = std::array<double, kRoads>;
using Vec5 = std::array<double, kQueues>;

enum class DelayMode { kWithDelay, kNoDelay };

// Which inflow rate the gradient formulas see for roads fed by discrete
// arrivals: the instantaneous fluid inflow of the simulated path (zero between
// unit jumps) or the windowed count estimate N_a / t_w.
enum class InflowModel { kImpulse, kEstimated };

enum class MetricKind { kAverageQueue, kPower, kThreshold };

inline const char* to_string(MetricKind m) {
  switch (m) {
    case MetricKind::kAverageQueue: return "avg";
    case MetricKind::kPower: return "power";
    case MetricKind::kThreshold: return "threshold";
  }
  return "?";
}

// Perpendicular road at the same intersection (1<->3, 2<->4), zero-based.
constexpr int perpendicular(int road) { return (road + 2) % 4; }
// Intersection index of a road: roads 1,3 -> 0, roads 2,4 -> 1.
constexpr int intersection_of(int road) { return road % 2; }

struct NetworkConfig {
  // Exogenous arrival rates for roads 1, 3, 4 (road 2 is fed by road 1).
  std::array<double, 3> arrival_rates{0.41, 0.45, 0.32};
  Vec4 departure_rates{1.2, 1.3, 1.2, 1.1};
  double segment_length = 35.0;
  double vehicle_length = 1.0;
  double burst_speed = 1.0;
  double join_epsilon = 0.5;
  double horizon = 1000.0;
  Vec4 capacities{kUnbounded, kUnbounded, kUnbounded, kUnbounded};
  Vec4 initial_queues{0, 0, 0, 0};
  // Elapsed green time of the initially green road at each intersection.
  std::array<double, 2> initial_clocks{0, 0};
  DelayMode delay_mode = DelayMode::kWithDelay;
  // At most one burst in transit; a second one is a model violation.
  bool single_burst = false;
  double rate_window = 100.0;

  double arrival_rate(int road) const {
    switch (road) {
      case 0: return arrival_rates[0];
      case 2: return arrival_rates[1];
      case 3: return arrival_rates[2];
      default: return 0.0;
    }
  }

  // Transit is instantaneous when delays are ignored or the segment is empty.
  bool instantaneous_transit() const {
    return delay_mode == DelayMode::kNoDelay || segment_length <= 0.0;
  }

  void validate() const {
    for (double a : arrival_rates)
      if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("arrival rates must be finite and >= 0");
    for (double h : departure_rates)
      if (!(h >= 0.0) || !std::isfinite(h)) throw ConfigError("departure rates must be finite and >= 0");
    if (!(segment_length >= 0.0) || !std::isfinite(segment_length))
      throw ConfigError("segment_length must be >= 0");
    if (!(vehicle_length > 0.0)) throw ConfigError("vehicle_length must be > 0");
    if (!(burst_speed > 0.0)) throw ConfigError("burst_speed must be > 0");
    if (delay_mode == DelayMode::kWithDelay && segment_length > 0.0 &&
        !(join_epsilon > 0.0 && join_epsilon <= segment_length))
      throw ConfigError("join_epsilon must satisfy 0 < eps <= L");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon must be > 0");
    for (int i = 0; i < kRoads; ++i) {
      if (!(capacities[i] > 0.0)) throw ConfigError("queue capacities must be > 0");
      if (!(initial_queues[i] >= 0.0) || initial_queues[i] > capacities[i])
        throw ConfigError("initial queues must lie in [0, capacity]");
    }
    if (!(rate_window > 0.0)) throw ConfigError("rate_window must be > 0");
  }
};

// Green durations theta_1..theta_4 with a per-coordinate box.
struct ThetaVector {
  Vec4 value{40, 20, 20, 40};
  Vec4 lower{10, 10, 10, 10};
  Vec4 upper{50, 50, 50, 50};

  double operator[](int j) const { return value[j]; }
  double& operator[](int j) { return value[j]; }

  ThetaVector clamped() const {
    ThetaVector out = *this;
    for (int j = 0; j < kRoads; ++j) out.value[j] = std::clamp(value[j], lower[j], upper[j]);
    return out;
  }

  bool in_box() const {
    for (int j = 0; j < kRoads; ++j)
      if (value[j] < lower[j] || value[j] > upper[j]) return false;
    return true;
  }

  void validate() const {
    for (int j = 0; j < kRoads; ++j) {
      if (!(lower[j] > 0.0) || !(lower[j] <= upper[j]))
        throw ConfigError("theta bounds must satisfy 0 < min <= max");
      if (!(value[j] > 0.0) || !std::isfinite(value[j])) throw ConfigError("theta must be positive");
    }
  }
};

struct CostConfig {
  MetricKind metric = MetricKind::kAverageQueue;
  int power = 2;
  Vec5 weights{1, 1, 1, 1, 1};
  Vec5 thresholds{25, 25, 25, 25, 25};

  void validate() const {
    if (power < 1) throw ConfigError("power must be an integer >= 1");
    for (double w : weights)
      if (!(w >= 0.0)) throw ConfigError("weights must be >= 0");
    for (double z : thresholds)
      if (!(z > 0.0)) throw ConfigError("thresholds must be > 0");
  }
};

enum class StepNormalization { kNone, kInfNorm };

struct OptimizerConfig {
  double step0 = 5.0;
  double decay = 0.6;
  int replications = 10;
  int max_iterations = 50;
  double cost_tolerance = 1e-3;
  int patience = 3;
  double grad_tolerance = 1e-9;
  double divergence_factor = 10.0;
  bool common_random_numbers = true;
  std::uint64_t base_seed = 1;
  InflowModel inflow_model = InflowModel::kImpulse;
  StepNormalization normalization = StepNormalization::kInfNorm;
  int threads = 1;

  void validate() const {
    if (!(step0 > 0.0)) throw ConfigError("step0 must be > 0");
    if (!(decay >= 0.0)) throw ConfigError("decay must be >= 0");
    if (replications < 1) throw ConfigError("replications must be >= 1");
    if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
    if (patience < 1) throw ConfigError("patience must be >= 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
  }
};

}  // namespace tlc
