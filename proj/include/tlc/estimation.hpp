#pragma once

#include <deque>

namespace tlc {

struct RateEstimate {
  double alpha = 0.0;
  double h = 0.0;
  double window = 0.0;
  long arrivals_in_window = 0;
  double departed = 0.0;
};

// On-line estimates of the arrival and discharge rates of one road, built
// only from observed arrivals and discharge.
class RateEstimator {
 public:
  RateEstimator(double window = 100.0, double configured_h = 0.0)
      : window_(window), configured_h_(configured_h) {}

  void record_arrival(double t) { arrivals_.push_back(t); }

  // One vehicle discharged while green and non-empty.
  void record_departure() { departed_ += 1.0; }
  // Green-and-non-empty time during which departures were counted.
  void add_exposure(double dt) { exposure_ += dt; }
  void record_service(double volume, double exposure) {
    departed_ += volume;
    exposure_ += exposure;
  }

  // N_a / t_w over (t - t_w, t]; during warm-up the divisor is t.
  double estimate_alpha(double t) {
    const double lo = t - window_;
    while (!arrivals_.empty() && arrivals_.front() <= lo) arrivals_.pop_front();
    long n = 0;
    for (auto it = arrivals_.rbegin(); it != arrivals_.rend() && *it > t; ++it) --n;
    n += static_cast<long>(arrivals_.size());
    const double span = t < window_ ? t : window_;
    if (span <= 0.0) return 0.0;
    return static_cast<double>(n) / span;
  }

  double estimate_h() const {
    if (exposure_ <= 0.0) return configured_h_;
    return departed_ / exposure_;
  }

  RateEstimate snapshot(double t) {
    RateEstimate r;
    r.alpha = estimate_alpha(t);
    r.h = estimate_h();
    r.window = window_;
    r.arrivals_in_window = static_cast<long>(arrivals_.size());
    r.departed = departed_;
    return r;
  }

  double exposure() const { return exposure_; }

 private:
  double window_;
  double configured_h_;
  std::deque<double> arrivals_;
  double departed_ = 0.0;
  double exposure_ = 0.0;
};

}  // namespace tlc
