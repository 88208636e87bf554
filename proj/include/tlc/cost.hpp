#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "tlc/config.hpp"
#include "tlc/errors.hpp"
#include "tlc/events.hpp"
#include "tlc/ipa.hpp"

namespace tlc {

// Integral of (a + (b - a) s / D)^p over [0, D].
inline double linear_power_integral(double a, double b, double duration, int p) {
  if (p < 0) throw ConfigError("power must be >= 0");
  double sum = 0.0;
  double ak = 1.0;
  for (int k = 0; k <= p; ++k) {
    sum += ak * std::pow(b, p - k);
    ak *= a;
  }
  return duration * sum / (p + 1);
}

// Piece of a non-empty period with linear content and constant x'.
struct SubInterval {
  double t0 = 0.0;
  double t1 = 0.0;
  double x0 = 0.0;
  double x1 = 0.0;
  Vec4 xprime{};
};

struct NepRecord {
  int queue = 0;
  double start = 0.0;
  double end = 0.0;
  std::vector<SubInterval> pieces;
};

// P * sum over pieces of x' * integral of w x^(P-1).
inline Vec4 power_gradient(const NepRecord& nep, int power, double weight) {
  Vec4 g{};
  if (power < 1) return g;
  for (const auto& s : nep.pieces) {
    const double integral = linear_power_integral(s.x0, s.x1, s.t1 - s.t0, power - 1);
    g = g + (power * weight * integral) * s.xprime;
  }
  return g;
}

// Exceedance interval [gamma, psi] of one queue.
struct ThresholdInterval {
  int queue = 0;
  double gamma = 0.0;
  double psi = 0.0;
  Vec4 gamma_prime{};
  Vec4 psi_prime{};
};

inline Vec4 threshold_gradient(const ThresholdInterval& iv, double weight) {
  return weight * (iv.psi_prime - iv.gamma_prime);
}

// Sample cost and its IPA gradient accumulated along one run.
class CostAccumulator {
 public:
  CostAccumulator(const CostConfig& cost, double horizon) : cost_(cost), horizon_(horizon) {
    cost_.validate();
    if (!(horizon > 0.0)) throw ConfigError("horizon must be > 0");
  }

  void on_start(const Snapshot& s) {
    last_ = s;
    for (int q = 0; q < kQueues; ++q) {
      if (in_nep(s, q)) open_nep(q, s.time);
      if (s.above[q]) open_interval(q, s.time, Vec4{});
    }
  }

  // Linear stretch from the previous post-event state to `to`.
  void on_segment(const Snapshot& to, const std::array<Vec4, kQueues>& rows) {
    const double d = to.time - last_.time;
    if (d < 0.0) throw InternalError("segment with negative duration");
    if (d == 0.0) return;
    const int p = cost_.power;
    for (int q = 0; q < kQueues; ++q) {
      const double a = last_.content(q), b = to.content(q), w = cost_.weights[q];
      switch (cost_.metric) {
        case MetricKind::kAverageQueue:
          value_ += w * d * 0.5 * (a + b);
          break;
        case MetricKind::kPower:
          value_ += w * linear_power_integral(a, b, d, p);
          break;
        case MetricKind::kThreshold:
          value_ += last_.above[q] ? w * d : 0.0;
          break;
      }
      if (nep_open_[q]) neps_[nep_index_[q]].pieces.push_back(SubInterval{last_.time, to.time, a, b, rows[q]});
      if (cost_.metric != MetricKind::kThreshold) {
        const int pp = cost_.metric == MetricKind::kPower ? p : 1;
        direct_ = direct_ + (pp * w * linear_power_integral(a, b, d, pp - 1)) * rows[q];
      }
    }
  }

  void on_step(const EventStep& step, const Vec4& tau_prime) {
    const int p = cost_.metric == MetricKind::kPower ? cost_.power : 1;
    for (int q = 0; q < kQueues; ++q) {
      const double w = cost_.weights[q];
      const double before = step.pre.content(q), after = step.post.content(q);
      if (cost_.metric != MetricKind::kThreshold && before != after) {
        const Vec4 term = (w * (std::pow(before, p) - std::pow(after, p))) * tau_prime;
        jumps_ = jumps_ + term;
        direct_ = direct_ + term;
      }
      if (step.pre.above[q] != step.post.above[q]) {
        const double r0 = step.pre.above[q] ? 1.0 : 0.0, r1 = step.post.above[q] ? 1.0 : 0.0;
        if (cost_.metric == MetricKind::kThreshold) direct_ = direct_ + (w * (r0 - r1)) * tau_prime;
        if (step.post.above[q]) open_interval(q, step.time(), tau_prime);
        else close_interval(q, step.time(), tau_prime);
      }
      const bool was = nep_open_[q];
      const bool now = in_nep(step.post, q);
      if (was && !now) close_nep(q, step.time());
      if (!was && now) open_nep(q, step.time());
    }
    last_ = step.post;
  }

  void on_finish(const Snapshot& end, const std::array<Vec4, kQueues>& rows) {
    on_segment(end, rows);
    for (int q = 0; q < kQueues; ++q) {
      if (nep_open_[q]) close_nep(q, end.time);
      if (interval_open_[q]) close_interval(q, end.time, Vec4{});
    }
  }

  double value() const { return value_ / horizon_; }

  // Gradient assembled from the per-period registries plus jump terms.
  Vec4 gradient() const {
    Vec4 g{};
    if (cost_.metric == MetricKind::kThreshold) {
      for (const auto& iv : intervals_) g = g + threshold_gradient(iv, cost_.weights[iv.queue]);
    } else {
      const int p = cost_.metric == MetricKind::kPower ? cost_.power : 1;
      for (const auto& n : neps_) g = g + power_gradient(n, p, cost_.weights[n.queue]);
      g = g + jumps_;
    }
    return (1.0 / horizon_) * g;
  }

  // Same gradient accumulated directly over the horizon.
  Vec4 direct_gradient() const { return (1.0 / horizon_) * direct_; }

  const std::vector<NepRecord>& neps() const { return neps_; }
  const std::vector<ThresholdInterval>& intervals() const { return intervals_; }
  const CostConfig& config() const { return cost_; }

 private:
  static bool in_nep(const Snapshot& s, int q) {
    if (q == kTransit) return !s.bursts.empty();
    return s.busy[q] || s.x[q] > 0.0;
  }

  void open_nep(int q, double t) {
    nep_open_[q] = true;
    nep_index_[q] = neps_.size();
    neps_.push_back(NepRecord{q, t, t, {}});
  }
  void close_nep(int q, double t) {
    neps_[nep_index_[q]].end = t;
    nep_open_[q] = false;
  }
  void open_interval(int q, double t, const Vec4& tp) {
    interval_open_[q] = true;
    interval_index_[q] = intervals_.size();
    intervals_.push_back(ThresholdInterval{q, t, t, tp, {}});
  }
  void close_interval(int q, double t, const Vec4& tp) {
    if (!interval_open_[q]) return;
    auto& iv = intervals_[interval_index_[q]];
    iv.psi = t;
    iv.psi_prime = tp;
    interval_open_[q] = false;
  }

  CostConfig cost_;
  double horizon_;
  Snapshot last_;
  double value_ = 0.0;
  Vec4 jumps_{};
  Vec4 direct_{};
  std::vector<NepRecord> neps_;
  std::array<bool, kQueues> nep_open_{};
  std::array<std::size_t, kQueues> nep_index_{};
  std::vector<ThresholdInterval> intervals_;
  std::array<bool, kQueues> interval_open_{};
  std::array<std::size_t, kQueues> interval_index_{};
};

}  // namespace tlc
