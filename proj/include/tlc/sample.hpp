#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <tuple>
#include <vector>

#include "tlc/config.hpp"
#include "tlc/cost.hpp"
#include "tlc/events.hpp"
#include "tlc/ipa.hpp"
#include "tlc/simulator.hpp"

namespace tlc {

struct SampleOptions {
  InflowModel inflow = InflowModel::kImpulse;
  bool keep_events = false;
  bool keep_trace = false;
  bool keep_signature = false;
};

// Derivative state right after one event step.
struct TraceRow {
  double time = 0.0;
  EventKind kind = EventKind::kArrival;
  int queue = -1;
  std::array<Vec4, kQueues> xprime{};
  Vec4 tau_prime{};
};

// Event order per intersection: roads 1 and 3, then roads 2 and 4 with the
// transit segment. Coincidences across the two streams are not kinks.
using EventSignature = std::array<std::vector<std::tuple<int, int, int, int>>, 2>;

// Largest violations of the structural identities seen along a run.
struct InvariantReport {
  double start_derivative = 0.0;       // |x'| at S_i of roads 1, 3, 4
  double exogenous_change = 0.0;       // |delta x'| at unclipped arrivals
  double join_conservation = 0.0;      // x_2 + x_12 derivative balance at J_K
  double vehicle_conservation = 0.0;   // from the simulator
  long singular_events = 0;
};

struct SampleResult {
  double value = 0.0;
  Vec4 gradient{};
  Vec4 direct_gradient{};
  std::vector<EventRecord> events;
  std::vector<Vec5> event_state;  // content after each event record
  std::vector<TraceRow> trace;
  EventSignature signature;
  std::vector<BurstSummary> bursts;
  InvariantReport invariants;
  std::vector<NepRecord> neps;
  std::vector<ThresholdInterval> intervals;
};

inline Vec5 contents(const Snapshot& s) {
  Vec5 out{};
  for (int q = 0; q < kQueues; ++q) out[q] = s.content(q);
  return out;
}

// Couples the simulator, the derivative engine and the cost accumulator.
class SampleDriver : public RunObserver {
 public:
  SampleDriver(const NetworkConfig& net, const CostConfig& cost, const SampleOptions& opt)
      : ipa_(net, opt.inflow), cost_(cost, net.horizon), opt_(opt) {}

  void on_start(const Snapshot& s) override {
    ipa_.on_start(s);
    cost_.on_start(s);
  }

  void on_step(const EventStep& step) override {
    cost_.on_segment(step.pre, ipa_.rows());
    const auto before = ipa_.rows();
    ipa_.on_step(step);
    const auto after = ipa_.rows();
    const Vec4& tp = ipa_.last_tau_prime();
    cost_.on_step(step, tp);
    check(step, before, after, tp);
    if (opt_.keep_events) {
      const Vec5 state = contents(step.post);
      for (const auto& r : step.records) {
        result_.events.push_back(r);
        result_.event_state.push_back(state);
      }
    }
    if (opt_.keep_signature)
      for (const auto& r : step.records)
        result_.signature[(r.queue == 0 || r.queue == 2) ? 0 : 1].emplace_back(static_cast<int>(r.kind), r.queue,
                                                                               r.burst, r.final ? -1 : r.k);
    if (opt_.keep_trace)
      result_.trace.push_back(TraceRow{step.time(), step.primary().kind, step.primary().queue, after, tp});
  }

  void on_finish(const Snapshot& end) override { cost_.on_finish(end, ipa_.rows()); }

  SampleResult take(const Simulator& sim) {
    result_.value = cost_.value();
    result_.gradient = cost_.gradient();
    result_.direct_gradient = cost_.direct_gradient();
    result_.bursts = sim.burst_log();
    result_.invariants.vehicle_conservation = sim.conservation_error();
    result_.invariants.singular_events = ipa_.singular_events();
    result_.neps = cost_.neps();
    result_.intervals = cost_.intervals();
    return std::move(result_);
  }

 private:
  void check(const EventStep& step, const std::array<Vec4, kQueues>& before, const std::array<Vec4, kQueues>& after,
             const Vec4& tp) {
    auto& inv = result_.invariants;
    const auto& p = step.primary();
    for (const auto& r : step.records)
      if (r.kind == EventKind::kStart && (r.queue == 0 || r.queue == 2 || r.queue == 3))
        inv.start_derivative = std::max(inv.start_derivative, max_abs(after[r.queue]));
    if (p.kind == EventKind::kArrival && !(step.post.full[p.queue] && !step.pre.full[p.queue]))
      for (int q = 0; q < kQueues; ++q)
        inv.exogenous_change = std::max(inv.exogenous_change, max_abs(after[q] - before[q]));
    if (p.kind == EventKind::kJoin && p.final && p.burst >= 0) {
      bool clamped = false;
      for (const auto& b : step.post.bursts) clamped = clamped || b.gap_clamped;
      if (!clamped) {
        const auto& rates = ipa_.rates();
        const double f_pre = rates.rate(step.pre, 1) + rates.rate(step.pre, kTransit);
        const double f_post = rates.rate(step.post, 1) + rates.rate(step.post, kTransit);
        const Vec4 lhs = (after[1] + after[kTransit]) - (before[1] + before[kTransit]);
        inv.join_conservation = std::max(inv.join_conservation, max_abs(lhs - (f_pre - f_post) * tp));
      }
    }
  }

  IpaEngine ipa_;
  CostAccumulator cost_;
  SampleOptions opt_;
  SampleResult result_;
};

// One simulated sample path: cost, IPA gradient and diagnostics.
inline SampleResult run_sample(const NetworkConfig& net, const ThetaVector& theta, const CostConfig& cost,
                               std::uint64_t seed, const SampleOptions& opt = {}) {
  cost.validate();
  Simulator sim(net, theta, cost.thresholds, seed);
  SampleDriver driver(net, cost, opt);
  sim.run({&driver});
  return driver.take(sim);
}

// Central finite difference on the same seed, with a smoothness flag per
// coordinate: the perturbed runs must reproduce the base event order.
struct GradCheck {
  Vec4 ipa{};
  Vec4 fd{};
  std::array<bool, kRoads> smooth{};
  double value = 0.0;
};

inline GradCheck finite_difference_check(const NetworkConfig& net, const ThetaVector& theta, const CostConfig& cost,
                                         std::uint64_t seed, double h = 1e-3, const SampleOptions& base_opt = {}) {
  SampleOptions opt = base_opt;
  opt.keep_signature = true;
  const auto base = run_sample(net, theta, cost, seed, opt);
  GradCheck out;
  out.ipa = base.gradient;
  out.value = base.value;
  for (int j = 0; j < kRoads; ++j) {
    ThetaVector plus = theta, minus = theta;
    plus.value[j] += h;
    minus.value[j] -= h;
    plus.lower[j] = std::min(plus.lower[j], plus.value[j]);
    plus.upper[j] = std::max(plus.upper[j], plus.value[j]);
    minus.lower[j] = std::min(minus.lower[j], minus.value[j]);
    minus.upper[j] = std::max(minus.upper[j], minus.value[j]);
    const auto rp = run_sample(net, plus, cost, seed, opt);
    const auto rm = run_sample(net, minus, cost, seed, opt);
    out.fd[j] = (rp.value - rm.value) / (2.0 * h);
    out.smooth[j] = rp.signature == base.signature && rm.signature == base.signature;
  }
  return out;
}

}  // namespace tlc
