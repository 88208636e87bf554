#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "tlc/errors.hpp"

namespace tlc {

struct TransitGeometry {
  double segment_length = 35.0;
  double vehicle_length = 1.0;
  double speed = 1.0;
  double join_epsilon = 0.5;
};

// Travel time over a gap at burst speed.
inline double tau(double gap, double speed = 1.0) { return gap / speed; }

// A flow burst between intersection 1 and the tail of queue 2.
struct TransitBurst {
  int id = -1;
  double content = 0.0;   // x_12, vehicles
  bool open = true;       // receiving road-1 outflow
  double gap = 0.0;       // delta_12, distance
  double estimate = 0.0;  // x-bar_2, vehicles
  double clock_origin = 0.0;
  double speed = 1.0;
  std::vector<double> sigma;  // sigma_0, sigma_1, ...
  bool gap_clamped = false;

  double sigma0() const { return sigma.front(); }
  int k() const { return static_cast<int>(sigma.size()) - 1; }
  double clock(double t) const { return t - clock_origin; }
  double next_join_check() const {
    if (speed <= 0.0) return std::numeric_limits<double>::infinity();
    return clock_origin + tau(gap, speed);
  }
  double head_position(double t) const { return speed * (t - sigma0()); }
};

// Burst leaves node 1 at t while queue 2 holds x2 vehicles.
inline TransitBurst start_burst(double t, double x2_observed, const TransitGeometry& geo, int id = 0) {
  TransitBurst b;
  b.id = id;
  b.content = 0.0;
  b.open = true;
  b.gap = std::max(0.0, geo.segment_length - x2_observed * geo.vehicle_length);
  b.estimate = x2_observed;
  b.clock_origin = t;
  b.speed = geo.speed;
  b.sigma.push_back(t);
  return b;
}

enum class JoinCheck { kReschedule, kJoin };

// J_k handler: either the burst is close enough to the queue tail and joins,
// or the gap is re-estimated from the observed queue.
inline JoinCheck on_Jk(double t, TransitBurst& b, double x2_observed, const TransitGeometry& geo) {
  constexpr double kTol = 1e-9;
  const double diff = b.estimate - x2_observed;
  if (diff < -kTol * std::max(1.0, b.estimate))
    throw ModelViolation("queue 2 grew while a burst was in transit");
  b.sigma.push_back(t);
  if (std::max(diff, 0.0) * geo.vehicle_length <= geo.join_epsilon) {
    b.gap = 0.0;
    return JoinCheck::kJoin;
  }
  b.gap = diff * geo.vehicle_length;
  b.estimate = x2_observed;
  b.clock_origin = t;
  return JoinCheck::kReschedule;
}

// Inflow to the open burst: nothing on red, the arrival rate while road 1 is
// empty and keeping up, the discharge rate otherwise.
inline double transit_inflow_rate(bool green1, bool road1_busy, double alpha1, double h1) {
  if (!green1) return 0.0;
  if (!road1_busy && alpha1 <= h1) return alpha1;
  return h1;
}

inline void accumulate_transit(TransitBurst& b, double rate, double dt) {
  if (b.open) b.content += rate * dt;
}

enum class ThresholdCrossing { kNone, kUp, kDown };

// Level crossing of zeta between two observations; the exceedance indicator
// is 1[x >= zeta].
inline ThresholdCrossing detect_threshold_events(double x_before, double x_after, double zeta) {
  if (x_before < zeta && x_after >= zeta) return ThresholdCrossing::kUp;
  if (x_before >= zeta && x_after < zeta) return ThresholdCrossing::kDown;
  return ThresholdCrossing::kNone;
}

// Bursts in transit ordered by creation (front = leader).
class TransitLine {
 public:
  explicit TransitLine(TransitGeometry geo = {}) : geo_(geo) {}

  const TransitGeometry& geometry() const { return geo_; }
  std::vector<TransitBurst>& bursts() { return bursts_; }
  const std::vector<TransitBurst>& bursts() const { return bursts_; }
  bool empty() const { return bursts_.empty(); }

  double total() const {
    double s = 0.0;
    for (const auto& b : bursts_) s += b.content;
    return s;
  }

  TransitBurst* open_burst() {
    for (auto& b : bursts_)
      if (b.open) return &b;
    return nullptr;
  }

  TransitBurst* find(int id) {
    for (auto& b : bursts_)
      if (b.id == id) return &b;
    return nullptr;
  }

  TransitBurst& start(double t, double x2_observed, std::optional<double> speed = std::nullopt) {
    auto b = start_burst(t, x2_observed, geo_, next_id_++);
    if (speed) b.speed = *speed;
    bursts_.push_back(std::move(b));
    return bursts_.back();
  }

  // Removes burst `id` after its J_K and applies the trailing-burst resets:
  // each trailer's gap shrinks by the joined content and its estimate becomes
  // the new queue length. Returns the joined content.
  double complete_join(double t, int id, double x2_after) {
    auto it = std::find_if(bursts_.begin(), bursts_.end(), [id](const auto& b) { return b.id == id; });
    if (it == bursts_.end()) throw ProtocolError("join for unknown burst");
    const double y = it->content;
    bursts_.erase(it);
    for (auto& b : bursts_) {
      b.gap_clamped = false;
      b.gap -= y * geo_.vehicle_length;
      b.estimate = x2_after;
      const double travelled = b.speed * (t - b.clock_origin);
      if (b.gap <= travelled) {
        b.gap = travelled;
        b.gap_clamped = true;
      }
    }
    return y;
  }

  struct Merge {
    double time;
    int leader;
    int trailer;
  };

  // Earliest time a trailing burst head reaches the tail of the burst ahead.
  std::optional<Merge> next_merge(double now) const {
    std::optional<Merge> best;
    for (std::size_t i = 1; i < bursts_.size(); ++i) {
      const auto& lead = bursts_[i - 1];
      const auto& trail = bursts_[i];
      if (lead.open) continue;
      const double dv = trail.speed - lead.speed;
      const double tail_offset = lead.content * geo_.vehicle_length;
      // trail.speed*(t - s0T) = lead.speed*(t - s0L) - tail_offset
      const double rhs = trail.speed * trail.sigma0() - lead.speed * lead.sigma0() - tail_offset;
      double t;
      if (dv > 0.0) {
        t = rhs / dv;
      } else {
        continue;
      }
      t = std::max(t, now);
      if (!best || t < best->time) best = Merge{t, lead.id, trail.id};
    }
    return best;
  }

  // Trailer absorbs into the leader (conserves total content).
  void merge(int leader, int trailer) {
    auto* lead = find(leader);
    auto it = std::find_if(bursts_.begin(), bursts_.end(), [trailer](const auto& b) { return b.id == trailer; });
    if (!lead || it == bursts_.end()) throw ProtocolError("merge of unknown bursts");
    lead->content += it->content;
    lead->open = lead->open || it->open;
    bursts_.erase(it);
  }

  void clear_flags() {
    for (auto& b : bursts_) b.gap_clamped = false;
  }

 private:
  TransitGeometry geo_;
  std::vector<TransitBurst> bursts_;
  int next_id_ = 0;
};

}  // namespace tlc
