#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "tlc/arrivals.hpp"
#include "tlc/config.hpp"
#include "tlc/errors.hpp"
#include "tlc/estimation.hpp"
#include "tlc/events.hpp"
#include "tlc/transit.hpp"

namespace tlc {

// Receives the event stream of one run.
class RunObserver {
 public:
  virtual ~RunObserver() = default;
  virtual void on_start(const Snapshot&) {}
  virtual void on_step(const EventStep&) {}
  virtual void on_finish(const Snapshot&) {}
};

// Lifetime of one burst, kept for the joining-sequence bounds.
struct BurstSummary {
  double sigma0 = 0.0;
  double x2_at_sigma0 = 0.0;
  int joins_checked = 0;  // K
  double sigma_k = 0.0;   // sigma_K
  bool immediate = false;
};

// Fluid-service discrete-event simulator of the two-intersection network.
// Arrivals are unit jumps at Poisson epochs; a green non-empty road discharges
// continuously at h_i; road-1 discharge travels to queue 2 as flow bursts.
class Simulator {
 public:
  Simulator(NetworkConfig cfg, ThetaVector theta, Vec5 thresholds, std::uint64_t seed)
      : cfg_(std::move(cfg)), theta_(theta), zeta_(thresholds), seed_(seed),
        line_(TransitGeometry{cfg_.segment_length, cfg_.vehicle_length, cfg_.burst_speed, cfg_.join_epsilon}) {
    cfg_.validate();
    theta_.validate();
    for (int i = 0; i < 2; ++i)
      if (cfg_.initial_clocks[i] < 0.0 || cfg_.initial_clocks[i] >= theta_[i])
        throw ConfigError("initial clock must lie in [0, theta)");
    for (int q = 0; q < kRoads; ++q) {
      estimators_[q] = RateEstimator(cfg_.rate_window, cfg_.departure_rates[q]);
      const double rate = cfg_.arrival_rate(q);
      if (q != 1) arrivals_[q] = generate_arrivals(rate, cfg_.horizon, seed_, static_cast<std::uint64_t>(q));
    }
  }

  // Replaces the sampled arrival epochs of one road (roads 1, 3, 4).
  void set_arrivals(int road, std::vector<double> times) {
    if (road < 0 || road >= kRoads || road == 1) throw ConfigError("only roads 1, 3, 4 have external arrivals");
    if (!std::is_sorted(times.begin(), times.end())) throw ConfigError("arrival times must be sorted");
    arrivals_[road] = std::move(times);
  }

  const std::vector<BurstSummary>& burst_log() const { return burst_log_; }
  const ThetaVector& theta() const { return theta_; }
  const NetworkConfig& config() const { return cfg_; }
  std::uint64_t seed() const { return seed_; }

  // Largest |entered - left - content| seen at any event, over all queues.
  double conservation_error() const { return conservation_error_; }

  void run(std::vector<RunObserver*> observers) {
    observers_ = std::move(observers);
    initialize();
    const Snapshot start = snapshot();
    for (auto* o : observers_) o->on_start(start);
    const double horizon = cfg_.horizon;
    long same_instant = 0;
    double last_time = -1.0;
    while (true) {
      const Candidate next = next_event();
      if (next.time >= horizon) break;
      advance(next.time);
      Step step;
      step.pre = snapshot();
      dispatch(next, step);
      if (step.records.empty()) continue;
      normalize_modes(step);
      check_state();
      EventStep out{std::move(step.records), std::move(step.pre), snapshot()};
      for (auto* o : observers_) o->on_step(out);
      line_.clear_flags();
      same_instant = next.time == last_time ? same_instant + 1 : 0;
      last_time = next.time;
      if (same_instant > kMaxStepsPerInstant) throw InternalError("event loop stalled at one instant");
    }
    advance(horizon);
    const Snapshot end = snapshot();
    for (auto* o : observers_) o->on_finish(end);
  }

 private:
  static constexpr double kGapTolerance = 1e-9;
  static constexpr long kMaxStepsPerInstant = 1'000'000;

  enum class Cause { kSwitch, kDrain, kFull, kCrossUp, kCrossDown, kJoinCheck, kMerge, kArrival, kNone };

  struct Candidate {
    double time = std::numeric_limits<double>::infinity();
    int priority = 99;
    Cause cause = Cause::kNone;
    int index = -1;   // intersection, queue, road or burst id
    int index2 = -1;  // merge trailer
  };

  struct Step {
    std::vector<EventRecord> records;
    Snapshot pre;
  };

  // ---- rates -------------------------------------------------------------
  double service(int q) const { return green_[q] ? cfg_.departure_rates[q] : 0.0; }
  double road1_outflow() const {
    if (busy_[0]) return service(0);
    return 0.0;
  }
  double inflow(int q) const {
    if (q == 1 && attached_) return road1_outflow();
    return 0.0;
  }
  double rate(int q) const {
    const double in = inflow(q), sv = service(q);
    if (full_[q]) return std::min(0.0, in - sv);
    if (busy_[q]) return in - sv;
    return std::max(0.0, in - sv);
  }
  double burst_rate(const TransitBurst& b) const {
    return (b.open && !attached_) ? road1_outflow() : 0.0;
  }
  double transit_rate() const {
    double r = 0.0;
    for (const auto& b : line_.bursts()) r += burst_rate(b);
    return r;
  }
  double content(int q) const { return q == kTransit ? line_.total() : x_[q]; }
  double content_rate(int q) const { return q == kTransit ? transit_rate() : rate(q); }

  // ---- setup -------------------------------------------------------------
  void initialize() {
    t_ = 0.0;
    for (int q = 0; q < kRoads; ++q) {
      x_[q] = cfg_.initial_queues[q];
      busy_[q] = x_[q] > 0.0;
      full_[q] = x_[q] >= cfg_.capacities[q];
      entered_[q] = x_[q];
      left_[q] = 0.0;
      next_arrival_[q] = 0;
    }
    green_ = {true, true, false, false};
    green_road_ = {0, 1};
    next_switch_[0] = theta_[0] - cfg_.initial_clocks[0];
    next_switch_[1] = theta_[1] - cfg_.initial_clocks[1];
    transit_entered_ = 0.0;
    transit_left_ = 0.0;
    Step scratch;
    if (busy_[0]) begin_outflow(scratch);
    for (int q = 0; q < kQueues; ++q) above_[q] = content(q) >= zeta_[q];
  }

  Snapshot snapshot() {
    Snapshot s;
    s.time = t_;
    s.x = x_;
    s.busy = busy_;
    s.full = full_;
    s.green = green_;
    s.attached = attached_;
    s.above = above_;
    s.bursts.reserve(line_.bursts().size());
    for (const auto& b : line_.bursts()) {
      BurstView v;
      v.id = b.id;
      v.content = b.content;
      v.open = b.open;
      v.gap = b.gap;
      v.estimate = b.estimate;
      v.clock_origin = b.clock_origin;
      v.speed = b.speed;
      v.sigma0 = b.sigma0();
      v.k = b.k();
      v.gap_clamped = b.gap_clamped;
      s.bursts.push_back(v);
    }
    for (int q = 0; q < kRoads; ++q) {
      s.h_obs[q] = estimators_[q].estimate_h();
      s.alpha_obs[q] = estimators_[q].estimate_alpha(t_);
    }
    return s;
  }

  // ---- scheduling --------------------------------------------------------
  static void consider(Candidate& best, double time, int priority, Cause cause, int index, int index2 = -1) {
    if (time < best.time || (time == best.time && priority < best.priority)) {
      best = Candidate{time, priority, cause, index, index2};
    }
  }

  Candidate next_event() const {
    Candidate best;
    for (int i = 0; i < 2; ++i) consider(best, next_switch_[i], 0, Cause::kSwitch, i);
    for (int q = 0; q < kRoads; ++q) {
      const double r = rate(q);
      if (busy_[q] && r < 0.0) consider(best, t_ + std::max(0.0, x_[q]) / -r, 1, Cause::kDrain, q);
      if (!full_[q] && r > 0.0 && std::isfinite(cfg_.capacities[q]))
        consider(best, t_ + std::max(0.0, cfg_.capacities[q] - x_[q]) / r, 1, Cause::kFull, q);
    }
    for (int q = 0; q < kQueues; ++q) {
      const double r = content_rate(q);
      const double xq = content(q);
      if (above_[q] && r < 0.0) consider(best, t_ + std::max(0.0, xq - zeta_[q]) / -r, 1, Cause::kCrossDown, q);
      if (!above_[q] && r > 0.0) consider(best, t_ + std::max(0.0, zeta_[q] - xq) / r, 1, Cause::kCrossUp, q);
    }
    for (const auto& b : line_.bursts()) consider(best, std::max(t_, b.next_join_check()), 2, Cause::kJoinCheck, b.id);
    if (auto m = line_.next_merge(t_)) consider(best, m->time, 2, Cause::kMerge, m->leader, m->trailer);
    for (int q = 0; q < kRoads; ++q) {
      const auto& arr = arrivals_[q];
      if (next_arrival_[q] < arr.size()) consider(best, arr[next_arrival_[q]], 3, Cause::kArrival, q);
    }
    return best;
  }

  void advance(double t) {
    const double dt = t - t_;
    if (dt < 0.0) throw InternalError("time moved backwards");
    if (dt > 0.0) {
      std::array<double, kRoads> r{};
      for (int q = 0; q < kRoads; ++q) r[q] = rate(q);
      for (auto& b : line_.bursts()) {
        const double br = burst_rate(b);
        accumulate_transit(b, br, dt);
        transit_entered_ += br * dt;
      }
      for (int q = 0; q < kRoads; ++q) {
        const double in = inflow(q);
        const double out = in - r[q];
        entered_[q] += in * dt;
        left_[q] += out * dt;
        x_[q] = std::clamp(x_[q] + r[q] * dt, 0.0, cfg_.capacities[q]);
        if (busy_[q] && green_[q]) estimators_[q].record_service(cfg_.departure_rates[q] * dt, dt);
      }
    }
    t_ = t;
  }

  EventRecord make(EventKind kind, int queue = -1) {
    EventRecord r;
    r.kind = kind;
    r.time = t_;
    r.queue = queue;
    if (queue >= 0 && queue < kRoads) {
      r.alpha_obs = estimators_[queue].estimate_alpha(t_);
      r.h_obs = estimators_[queue].estimate_h();
    }
    r.x_after = queue >= 0 ? content(queue) : 0.0;
    return r;
  }

  void push(Step& s, EventRecord r) {
    if (r.queue >= 0) r.x_after = content(r.queue);
    s.records.push_back(r);
  }

  // ---- event handlers ----------------------------------------------------
  void dispatch(const Candidate& c, Step& s) {
    switch (c.cause) {
      case Cause::kSwitch: on_switch(c.index, s); break;
      case Cause::kDrain: on_drain(c.index, s); break;
      case Cause::kFull: on_full(c.index, s); break;
      case Cause::kCrossUp: on_flow_crossing(c.index, true, s); break;
      case Cause::kCrossDown: on_flow_crossing(c.index, false, s); break;
      case Cause::kJoinCheck: on_join_check(c.index, s); break;
      case Cause::kMerge: on_merge(c.index, c.index2, s); break;
      case Cause::kArrival: on_arrival(c.index, s); break;
      case Cause::kNone: break;
    }
  }

  void on_switch(int intersection, Step& s) {
    const int red = green_road_[intersection];
    const int grn = perpendicular(red);
    green_[red] = false;
    green_[grn] = true;
    green_road_[intersection] = grn;
    next_switch_[intersection] = t_ + theta_[grn];
    push(s, make(EventKind::kGreenToRed, red));
    push(s, make(EventKind::kRedToGreen, grn));
    if (red == 0) {
      if (auto* b = line_.open_burst()) b->open = false;
      attached_ = false;
    }
    if (grn == 0 && busy_[0]) begin_outflow(s);
  }

  void on_drain(int q, Step& s) {
    x_[q] = 0.0;
    busy_[q] = false;
    push(s, make(EventKind::kEnd, q));
    if (q == 0) attached_ = false;
  }

  void on_full(int q, Step& s) {
    x_[q] = cfg_.capacities[q];
    full_[q] = true;
    push(s, make(EventKind::kFull, q));
  }

  void on_flow_crossing(int q, bool up, Step& s) {
    if (q < kRoads) x_[q] = zeta_[q];
    above_[q] = up;
    push(s, make(up ? EventKind::kThresholdUp : EventKind::kThresholdDown, q));
  }

  void jump_crossing(int q, double before, double after, Step& s) {
    const auto c = detect_threshold_events(before, after, zeta_[q]);
    if (c == ThresholdCrossing::kUp && !above_[q]) {
      above_[q] = true;
      push(s, make(EventKind::kThresholdUp, q));
    } else if (c == ThresholdCrossing::kDown && above_[q]) {
      above_[q] = false;
      push(s, make(EventKind::kThresholdDown, q));
    }
  }

  void on_arrival(int q, Step& s) {
    ++next_arrival_[q];
    estimators_[q].record_arrival(t_);
    const double before = x_[q];
    const bool was_busy = busy_[q];
    auto rec = make(EventKind::kArrival, q);
    x_[q] = std::min(cfg_.capacities[q], x_[q] + 1.0);
    entered_[q] += x_[q] - before;
    if (x_[q] >= cfg_.capacities[q]) full_[q] = true;
    push(s, rec);
    if (!was_busy && x_[q] > 0.0) {
      busy_[q] = true;
      push(s, make(EventKind::kGamma, q));
      push(s, make(EventKind::kStart, q));
      if (q == 0 && green_[0] && !attached_ && !line_.open_burst()) begin_outflow(s);
    }
    jump_crossing(q, before, x_[q], s);
  }

  // Road-1 discharge just became positive with nothing to receive it.
  void begin_outflow(Step& s) {
    if (cfg_.instantaneous_transit()) {
      attached_ = true;
      return;
    }
    const double gap = cfg_.segment_length - x_[1] * cfg_.vehicle_length;
    if (gap <= kGapTolerance * cfg_.segment_length) {
      // Queue 2 already spans the segment: the burst joins on release.
      attached_ = true;
      auto j0 = make(EventKind::kJoin, kTransit);
      push(s, j0);
      auto jk = make(EventKind::kJoin, kTransit);
      jk.k = 1;
      jk.final = true;
      push(s, jk);
      burst_log_.push_back(BurstSummary{t_, x_[1], 1, t_, true});
      return;
    }
    if (cfg_.single_burst && !line_.empty())
      throw ModelViolation("a second burst was released while one is in transit");
    const bool was_empty = line_.empty();
    auto& b = line_.start(t_, x_[1]);
    x2_at_start_.push_back({b.id, x_[1]});
    auto j0 = make(EventKind::kJoin, kTransit);
    j0.burst = b.id;
    push(s, j0);
    if (was_empty) {
      auto st = make(EventKind::kTransitStart, kTransit);
      st.burst = b.id;
      push(s, st);
    }
  }

  double x2_at_start(int id) const {
    for (const auto& [bid, x2] : x2_at_start_)
      if (bid == id) return x2;
    return 0.0;
  }

  void on_join_check(int id, Step& s) {
    auto* b = line_.find(id);
    if (!b) throw InternalError("join check for missing burst");
    const auto outcome = on_Jk(t_, *b, x_[1], line_.geometry());
    auto rec = make(EventKind::kJoin, kTransit);
    rec.burst = id;
    rec.k = b->k();
    if (outcome == JoinCheck::kReschedule) {
      push(s, rec);
      return;
    }
    rec.final = true;
    const bool was_open = b->open;
    const double y = b->content;
    const int k = b->k();
    const double sigma0 = b->sigma0();
    const double x2_before = x_[1];
    const double transit_before = line_.total();
    x_[1] += y;
    entered_[1] += y;
    transit_left_ += y;
    line_.complete_join(t_, id, x_[1]);
    burst_log_.push_back(BurstSummary{sigma0, x2_at_start(id), k, t_, false});
    push(s, rec);
    auto ed = make(EventKind::kServerEmpty, kTransit);
    ed.burst = id;
    push(s, ed);
    if (line_.empty()) push(s, make(EventKind::kTransitEnd, kTransit));
    if (!busy_[1] && x_[1] > 0.0) {
      busy_[1] = true;
      push(s, make(EventKind::kStart, 1));
    }
    if (std::isfinite(cfg_.capacities[1]) && x_[1] > cfg_.capacities[1])
      throw ModelViolation("burst overflowed queue 2 capacity");
    jump_crossing(1, x2_before, x_[1], s);
    jump_crossing(kTransit, transit_before, line_.total(), s);
    if (was_open && green_[0] && busy_[0]) begin_outflow(s);
  }

  void on_merge(int leader, int trailer, Step& s) {
    line_.merge(leader, trailer);
    auto rec = make(EventKind::kMerge, kTransit);
    rec.burst = leader;
    rec.k = trailer;
    push(s, rec);
  }

  // Empty queues whose inflow now exceeds service start a non-empty period;
  // full queues whose service now exceeds inflow leave the capacity mode.
  void normalize_modes(Step& s) {
    for (int q = 0; q < kRoads; ++q) {
      const double in = inflow(q), sv = service(q);
      if (!busy_[q] && in - sv > 0.0) {
        busy_[q] = true;
        push(s, make(EventKind::kGamma, q));
        push(s, make(EventKind::kStart, q));
      }
      if (full_[q] && in < sv) full_[q] = false;
    }
  }

  void check_state() {
    for (int q = 0; q < kRoads; ++q) {
      if (!std::isfinite(x_[q])) throw NumericError("non-finite queue content");
      const double err = std::abs(entered_[q] - left_[q] - x_[q]);
      conservation_error_ = std::max(conservation_error_, err / std::max(1.0, entered_[q]));
    }
    const double terr = std::abs(transit_entered_ - transit_left_ - line_.total());
    conservation_error_ = std::max(conservation_error_, terr / std::max(1.0, transit_entered_));
  }

  NetworkConfig cfg_;
  ThetaVector theta_;
  Vec5 zeta_;
  std::uint64_t seed_;
  TransitLine line_;
  std::vector<RunObserver*> observers_;

  double t_ = 0.0;
  Vec4 x_{};
  std::array<bool, kRoads> busy_{};
  std::array<bool, kRoads> full_{};
  LightState green_{};
  std::array<int, 2> green_road_{0, 1};
  std::array<double, 2> next_switch_{};
  std::array<std::vector<double>, kRoads> arrivals_;
  std::array<std::size_t, kRoads> next_arrival_{};
  std::array<RateEstimator, kRoads> estimators_;
  std::array<bool, kQueues> above_{};
  bool attached_ = false;

  Vec4 entered_{};
  Vec4 left_{};
  double transit_entered_ = 0.0;
  double transit_left_ = 0.0;
  double conservation_error_ = 0.0;

  std::vector<std::pair<int, double>> x2_at_start_;
  std::vector<BurstSummary> burst_log_;
};

}  // namespace tlc
