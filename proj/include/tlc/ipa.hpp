#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tlc/config.hpp"
#include "tlc/errors.hpp"
#include "tlc/events.hpp"
#include "tlc/simulator.hpp"

namespace tlc {

inline Vec4 operator+(Vec4 a, const Vec4& b) {
  for (int i = 0; i < kRoads; ++i) a[i] += b[i];
  return a;
}
inline Vec4 operator-(Vec4 a, const Vec4& b) {
  for (int i = 0; i < kRoads; ++i) a[i] -= b[i];
  return a;
}
inline Vec4 operator*(double s, Vec4 a) {
  for (auto& v : a) v *= s;
  return a;
}
inline Vec4 unit(int j) {
  Vec4 e{};
  e[j] = 1.0;
  return e;
}
inline double max_abs(const Vec4& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// Derivatives carried by one burst.
struct BurstDerivative {
  Vec4 content{};      // y'
  Vec4 sigma0{};       // sigma_0'
  Vec4 sigma_last{};   // sigma_k'
  Vec4 clock{};        // z' of the burst clock, -sigma_k'
  Vec4 gap{};          // delta'
  Vec4 estimate{};     // x-bar_2'
  Vec4 x2_at_sigma0{}; // x_2'(sigma_0+) + x2dot * sigma_0'
  int k = 0;
};

// x' = x' + (f_before - f_after) tau'
inline Vec4 boundary_update(double f_before, double f_after, const Vec4& xprime, const Vec4& tau_prime) {
  return xprime + (f_before - f_after) * tau_prime;
}

// tau' for an endogenous event g(x, theta) = 0 crossed by flow f. Returns
// nullopt when the denominator vanishes.
inline std::optional<Vec4> endogenous_tau_prime(double dg_dx, const Vec4& dg_dtheta, double f, const Vec4& xprime) {
  const double denom = dg_dx * f;
  if (std::abs(denom) < 1e-14) return std::nullopt;
  Vec4 out{};
  for (int j = 0; j < kRoads; ++j) out[j] = -(dg_dtheta[j] + dg_dx * xprime[j]) / denom;
  return out;
}

// Closed form for sigma_k' of a single burst:
// sigma_k' = sigma_0' - Lv (x_2'(sigma_{k-1}) + x2dot sigma_{k-1}') / v.
inline Vec4 closed_form_sigma_prime(double x2dot_prev, const Vec4& x2prime_prev, const Vec4& sigma_prev_prime,
                               const Vec4& sigma0_prime, double speed, double vehicle_length = 1.0) {
  return sigma0_prime - (vehicle_length / speed) * (x2prime_prev + x2dot_prev * sigma_prev_prime);
}

// One step of the recursive form, given delta' from the preceding check.
inline Vec4 recursive_sigma_prime(const Vec4& sigma_prev_prime, const Vec4& delta_prime, double speed) {
  return sigma_prev_prime + (1.0 / speed) * delta_prime;
}

// delta' after check k: Lv (x-bar_2'(sigma_{k-1}) - x_2'(sigma_k) - x2dot sigma_k').
inline Vec4 proof_delta2(const Vec4& estimate_prev_prime, const Vec4& x2prime, double x2dot, const Vec4& sigma_prime,
                         double vehicle_length = 1.0) {
  return vehicle_length * (estimate_prev_prime - (x2prime + x2dot * sigma_prime));
}

// Queue rates as seen through a snapshot. Inflows of roads 1, 3, 4 are either
// zero between arrival impulses or the observed rate estimate.
class FluidRates {
 public:
  explicit FluidRates(InflowModel model) : model_(model) {}

  double service(const Snapshot& s, int q) const { return s.green[q] ? s.h_obs[q] : 0.0; }

  double road1_outflow(const Snapshot& s) const {
    const double sv = service(s, 0);
    if (s.busy[0]) return sv;
    return std::min(external_inflow(s, 0), sv);
  }

  double external_inflow(const Snapshot& s, int q) const {
    if (q == 1) return 0.0;
    return model_ == InflowModel::kEstimated ? s.alpha_obs[q] : 0.0;
  }

  double inflow(const Snapshot& s, int q) const {
    if (q == 1) return s.attached ? road1_outflow(s) : 0.0;
    return external_inflow(s, q);
  }

  double rate(const Snapshot& s, int q) const {
    if (q == kTransit) {
      double r = 0.0;
      for (const auto& b : s.bursts) r += burst_rate(s, b);
      return r;
    }
    const double d = inflow(s, q) - service(s, q);
    if (s.full[q]) return std::min(0.0, d);
    if (s.busy[q]) return d;
    return std::max(0.0, d);
  }

  double burst_rate(const Snapshot& s, const BurstView& b) const {
    return (b.open && !s.attached) ? road1_outflow(s) : 0.0;
  }

 private:
  InflowModel model_;
};

// Propagates state derivatives with respect to theta along a sample path.
class IpaEngine : public RunObserver {
 public:
  IpaEngine(const NetworkConfig& cfg, InflowModel model)
      : rates_(model), speed_(cfg.burst_speed), vehicle_length_(cfg.vehicle_length) {}

  void on_start(const Snapshot& s) override {
    xprime_ = {};
    bursts_.clear();
    last_r2g_ = {};
    last_g2r_ = {};
    for (const auto& b : s.bursts) bursts_[b.id] = BurstDerivative{};
    last_tau_ = {};
  }

  void on_step(const EventStep& step) override {
    last_tau_ = event_time_derivative(step);
    for (int q : {0, 2, 3}) apply_event_phi_i(step, last_tau_, q);
    apply_event_phi_2(step, last_tau_);
    apply_event_phi_12(step, last_tau_);
  }

  // d tau / d theta of the step's events.
  Vec4 event_time_derivative(const EventStep& step) {
    const auto& p = step.primary();
    switch (p.kind) {
      case EventKind::kArrival:
        return {};
      case EventKind::kGreenToRed: {
        const int red = p.queue;
        const int grn = perpendicular(red);
        Vec4 tp = unit(red) + last_r2g_[red];
        last_g2r_[red] = tp;
        last_r2g_[grn] = tp;
        return tp;
      }
      case EventKind::kEnd:
      case EventKind::kFull:
      case EventKind::kThresholdUp:
      case EventKind::kThresholdDown: {
        const int q = p.queue;
        const double f = rates_.rate(step.pre, q);
        auto tp = endogenous_tau_prime(1.0, Vec4{}, f, row(q));
        if (!tp) {
          ++singular_events_;
          return {};
        }
        return *tp;
      }
      case EventKind::kJoin: {
        if (p.k == 0 || p.burst < 0) return {};
        const auto& d = burst(p.burst);
        return (1.0 / speed_) * d.gap - d.clock;
      }
      case EventKind::kMerge:
        throw UnsupportedMode("derivatives across a burst merge are not supported");
      default:
        throw ProtocolError(std::string("unexpected primary event ") + to_string(p.kind));
    }
  }

  // Roads 1, 3, 4: boundary term, then the E_i and capacity resets.
  void apply_event_phi_i(const EventStep& step, const Vec4& tp, int q) {
    xprime_[q] = boundary_update(rates_.rate(step.pre, q), rates_.rate(step.post, q), xprime_[q], tp);
    reset_queue(step, q);
  }

  // Queue 2: boundary term plus the content of any burst that joins.
  void apply_event_phi_2(const EventStep& step, const Vec4& tp) {
    xprime_[1] = boundary_update(rates_.rate(step.pre, 1), rates_.rate(step.post, 1), xprime_[1], tp);
    for (const auto& r : step.records) {
      if (r.kind != EventKind::kJoin || !r.final || r.burst < 0) continue;
      const auto* pre = step.pre.find_burst(r.burst);
      if (!pre) throw ProtocolError("joined burst missing from pre-event state");
      joined_ = burst(r.burst).content + rates_.burst_rate(step.pre, *pre) * tp;
      xprime_[1] = xprime_[1] + joined_;
    }
    reset_queue(step, 1);
  }

  // Transit bursts: boundary terms, J_k chains, joins and new bursts.
  void apply_event_phi_12(const EventStep& step, const Vec4& tp) {
    for (const auto& b : step.post.bursts) {
      if (const auto* pre = step.pre.find_burst(b.id)) {
        auto& d = burst(b.id);
        d.content = boundary_update(rates_.burst_rate(step.pre, *pre), rates_.burst_rate(step.post, b), d.content, tp);
      }
    }
    const double f2_pre = rates_.rate(step.pre, 1);
    const double f2_post = rates_.rate(step.post, 1);
    for (const auto& r : step.records) {
      if (r.kind != EventKind::kJoin || r.burst < 0) continue;
      if (r.k == 0) continue;
      if (!r.final) {
        auto& d = burst(r.burst);
        const Vec4 x2_at = xprime_[1] + f2_pre * tp;
        d.gap = proof_delta2(d.estimate, xprime_[1], f2_pre, tp, vehicle_length_);
        d.estimate = x2_at;
        d.sigma_last = tp;
        d.clock = -1.0 * tp;
        ++d.k;
        continue;
      }
      bursts_.erase(r.burst);
      for (const auto& b : step.post.bursts) {
        auto it = bursts_.find(b.id);
        if (it == bursts_.end()) continue;
        auto& d = it->second;
        d.gap = d.gap - vehicle_length_ * joined_;
        d.estimate = xprime_[1] + f2_post * tp;
        if (b.gap_clamped) d.gap = speed_ * (tp + d.clock);
      }
    }
    for (const auto& b : step.post.bursts) {
      if (step.pre.find_burst(b.id)) continue;
      BurstDerivative d;
      d.content = (0.0 - rates_.burst_rate(step.post, b)) * tp;
      d.sigma0 = tp;
      d.sigma_last = tp;
      d.clock = -1.0 * tp;
      d.estimate = xprime_[1] + f2_post * tp;
      d.x2_at_sigma0 = d.estimate;
      d.gap = -vehicle_length_ * d.estimate;
      bursts_[b.id] = d;
    }
    for (const auto& r : step.records)
      if (r.kind == EventKind::kMerge) throw UnsupportedMode("derivatives across a burst merge are not supported");
  }

  const Vec4& row(int q) const {
    if (q == kTransit) {
      transit_cache_ = {};
      for (const auto& [id, d] : bursts_) transit_cache_ = transit_cache_ + d.content;
      return transit_cache_;
    }
    return xprime_[q];
  }
  std::array<Vec4, kQueues> rows() const {
    std::array<Vec4, kQueues> out{};
    for (int q = 0; q < kQueues; ++q) out[q] = row(q);
    return out;
  }
  const std::map<int, BurstDerivative>& bursts() const { return bursts_; }
  const BurstDerivative& burst(int id) const {
    auto it = bursts_.find(id);
    if (it == bursts_.end()) throw ProtocolError("no derivative state for burst " + std::to_string(id));
    return it->second;
  }
  BurstDerivative& burst(int id) {
    auto it = bursts_.find(id);
    if (it == bursts_.end()) throw ProtocolError("no derivative state for burst " + std::to_string(id));
    return it->second;
  }
  const Vec4& last_tau_prime() const { return last_tau_; }
  // z' of the light clock of a currently green road.
  Vec4 light_clock_prime(int road) const { return -1.0 * last_r2g_[road]; }
  long singular_events() const { return singular_events_; }
  const FluidRates& rates() const { return rates_; }

 private:
  void reset_queue(const EventStep& step, int q) {
    for (const auto& r : step.records) {
      if (r.queue != q) continue;
      if (r.kind == EventKind::kEnd || r.kind == EventKind::kFull) xprime_[q] = {};
    }
    if (step.post.full[q] && !step.pre.full[q]) xprime_[q] = {};
  }

  FluidRates rates_;
  double speed_;
  double vehicle_length_;
  std::array<Vec4, kRoads> xprime_{};
  std::map<int, BurstDerivative> bursts_;
  std::array<Vec4, kRoads> last_r2g_{};
  std::array<Vec4, kRoads> last_g2r_{};
  Vec4 last_tau_{};
  Vec4 joined_{};
  long singular_events_ = 0;
  mutable Vec4 transit_cache_{};
};

}  // namespace tlc
