#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tlc/config.hpp"
#include "tlc/optimizer.hpp"
#include "tlc/sample.hpp"
#include "tlc/simulator.hpp"

namespace tlc {

struct SweepPoint {
  double segment_length = 0.0;
  ThetaVector theta_with;     // optimized on the delay model
  ThetaVector theta_without;  // optimized on the instantaneous-transit model
  std::vector<double> cost_with;     // per evaluation seed, delay system
  std::vector<double> cost_without;  // per evaluation seed, delay system
  double mean_with = 0.0, se_with = 0.0;
  double mean_without = 0.0, se_without = 0.0;
};

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / v.size();
}
inline double stderr_of(const std::vector<double>& v) {
  return v.size() < 2 ? 0.0 : sample_stddev(v) / std::sqrt(static_cast<double>(v.size()));
}

inline std::vector<double> evaluate_costs(const NetworkConfig& net, const ThetaVector& theta, const CostConfig& cost,
                                          const std::vector<std::uint64_t>& seeds) {
  std::vector<double> out;
  out.reserve(seeds.size());
  for (auto s : seeds) out.push_back(run_sample(net, theta, cost, s).value);
  return out;
}

// For each L: optimize with and without transit delay, then score both
// controllers on the delay system over the evaluation seeds.
inline std::vector<SweepPoint> sweep_segment_length(const NetworkConfig& base, const ThetaVector& theta0,
                                                    const CostConfig& cost, const OptimizerConfig& opt,
                                                    const std::vector<double>& lengths,
                                                    const std::vector<std::uint64_t>& eval_seeds) {
  if (lengths.empty()) throw ConfigError("segment length list is empty");
  std::vector<SweepPoint> out;
  for (double L : lengths) {
    NetworkConfig with = base;
    with.segment_length = L;
    with.delay_mode = DelayMode::kWithDelay;
    NetworkConfig without = with;
    without.delay_mode = DelayMode::kNoDelay;
    SweepPoint p;
    p.segment_length = L;
    p.theta_with = optimize(with, theta0, cost, opt).theta;
    p.theta_without = optimize(without, theta0, cost, opt).theta;
    p.cost_with = evaluate_costs(with, p.theta_with, cost, eval_seeds);
    p.cost_without = evaluate_costs(with, p.theta_without, cost, eval_seeds);
    p.mean_with = mean_of(p.cost_with);
    p.se_with = stderr_of(p.cost_with);
    p.mean_without = mean_of(p.cost_without);
    p.se_without = stderr_of(p.cost_without);
    out.push_back(std::move(p));
  }
  return out;
}

// Time-weighted distribution of each queue's content.
struct QueueHistogram {
  double bin_width = 1.0;
  std::vector<double> time_in_bin;  // last bin collects everything beyond
  double time_empty = 0.0;
  double time_above = 0.0;  // x >= zeta
  double total_time = 0.0;

  double p_empty() const { return total_time > 0.0 ? time_empty / total_time : 0.0; }
  double exceedance() const { return total_time > 0.0 ? time_above / total_time : 0.0; }
};

class HistogramObserver : public RunObserver {
 public:
  HistogramObserver(const Vec5& zeta, double bin_width, int bins) : zeta_(zeta) {
    for (auto& h : hist_) {
      h.bin_width = bin_width;
      h.time_in_bin.assign(bins, 0.0);
    }
  }

  void on_start(const Snapshot& s) override { last_ = s; }
  void on_step(const EventStep& step) override {
    add(step.pre);
    last_ = step.post;
  }
  void on_finish(const Snapshot& s) override { add(s); }

  const std::array<QueueHistogram, kQueues>& histograms() const { return hist_; }

 private:
  // Content is linear between last_ and `to`.
  void add(const Snapshot& to) {
    const double d = to.time - last_.time;
    if (d <= 0.0) return;
    for (int q = 0; q < kQueues; ++q) {
      auto& h = hist_[q];
      const double a = last_.content(q), b = to.content(q);
      h.total_time += d;
      if (a == 0.0 && b == 0.0) h.time_empty += d;
      const double lo = std::min(a, b), hi = std::max(a, b);
      const int bins = static_cast<int>(h.time_in_bin.size());
      if (hi - lo < 1e-12) {
        h.time_in_bin[bin_of(lo, h)] += d;
        if (lo >= zeta_[q]) h.time_above += d;
        continue;
      }
      const double per_unit = d / (hi - lo);
      for (int k = bin_of(lo, h); k <= bin_of(hi, h) && k < bins; ++k) {
        const double b0 = k * h.bin_width;
        const double b1 = k == bins - 1 ? std::numeric_limits<double>::infinity() : b0 + h.bin_width;
        const double overlap = std::min(hi, b1) - std::max(lo, b0);
        if (overlap > 0.0) h.time_in_bin[k] += overlap * per_unit;
      }
      if (hi > zeta_[q]) h.time_above += (hi - std::max(lo, zeta_[q])) * per_unit;
    }
    last_ = to;
  }

  static int bin_of(double x, const QueueHistogram& h) {
    const int bins = static_cast<int>(h.time_in_bin.size());
    return std::clamp(static_cast<int>(std::floor(x / h.bin_width)), 0, bins - 1);
  }

  Vec5 zeta_;
  std::array<QueueHistogram, kQueues> hist_;
  Snapshot last_;
};

// Histograms pooled over seeds.
inline std::array<QueueHistogram, kQueues> queue_histograms(const NetworkConfig& net, const ThetaVector& theta,
                                                            const Vec5& zeta, const std::vector<std::uint64_t>& seeds,
                                                            double bin_width = 1.0, int bins = 80) {
  std::array<QueueHistogram, kQueues> pooled;
  for (auto& h : pooled) {
    h.bin_width = bin_width;
    h.time_in_bin.assign(bins, 0.0);
  }
  for (auto seed : seeds) {
    Simulator sim(net, theta, zeta, seed);
    HistogramObserver obs(zeta, bin_width, bins);
    sim.run({&obs});
    for (int q = 0; q < kQueues; ++q) {
      const auto& h = obs.histograms()[q];
      for (int k = 0; k < bins; ++k) pooled[q].time_in_bin[k] += h.time_in_bin[k];
      pooled[q].time_empty += h.time_empty;
      pooled[q].time_above += h.time_above;
      pooled[q].total_time += h.total_time;
    }
  }
  return pooled;
}

}  // namespace tlc
