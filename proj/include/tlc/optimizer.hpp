#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <string>
#include <vector>

#include "tlc/config.hpp"
#include "tlc/errors.hpp"
#include "tlc/ipa.hpp"
#include "tlc/sample.hpp"

namespace tlc {

struct GradientEstimate {
  double mean = 0.0;
  double stddev = 0.0;  // across replications
  Vec4 gradient{};
  std::vector<double> values;
};

// Seeds of the R replications at iteration k (k = 1, 2, ...).
inline std::vector<std::uint64_t> replication_seeds(const OptimizerConfig& opt, int k) {
  std::vector<std::uint64_t> seeds(opt.replications);
  const std::uint64_t offset = opt.common_random_numbers ? 0 : static_cast<std::uint64_t>(k - 1) * opt.replications;
  for (int r = 0; r < opt.replications; ++r) seeds[r] = opt.base_seed + offset + r;
  return seeds;
}

inline double sample_stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = 0.0;
  for (double x : v) m += x;
  m /= v.size();
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

inline GradientEstimate estimate_gradient(const NetworkConfig& net, const ThetaVector& theta, const CostConfig& cost,
                                          const std::vector<std::uint64_t>& seeds,
                                          InflowModel inflow = InflowModel::kImpulse, int threads = 1) {
  if (seeds.empty()) throw ConfigError("at least one replication is required");
  SampleOptions opt;
  opt.inflow = inflow;
  std::vector<SampleResult> runs(seeds.size());
  if (threads <= 1) {
    for (std::size_t r = 0; r < seeds.size(); ++r) runs[r] = run_sample(net, theta, cost, seeds[r], opt);
  } else {
    for (std::size_t base = 0; base < seeds.size(); base += threads) {
      std::vector<std::future<SampleResult>> jobs;
      for (std::size_t r = base; r < std::min(seeds.size(), base + threads); ++r)
        jobs.push_back(std::async(std::launch::async, [&, r] { return run_sample(net, theta, cost, seeds[r], opt); }));
      for (std::size_t i = 0; i < jobs.size(); ++i) runs[base + i] = jobs[i].get();
    }
  }
  GradientEstimate est;
  for (const auto& r : runs) {
    est.values.push_back(r.value);
    est.mean += r.value;
    est.gradient = est.gradient + r.gradient;
  }
  const double n = static_cast<double>(runs.size());
  est.mean /= n;
  est.gradient = (1.0 / n) * est.gradient;
  est.stddev = sample_stddev(est.values);
  return est;
}

inline double step_size(const OptimizerConfig& opt, int k) { return opt.step0 / std::pow(static_cast<double>(k), opt.decay); }

// Projected descent step. With kInfNorm the direction is Q / max|Q_j|, so
// c_k is the largest move of any light in seconds.
inline ThetaVector descent_step(const ThetaVector& theta, const Vec4& q, double c,
                                StepNormalization norm = StepNormalization::kNone) {
  Vec4 dir = q;
  if (norm == StepNormalization::kInfNorm) {
    const double m = max_abs(q);
    dir = m > 0.0 ? (1.0 / m) * q : Vec4{};
  }
  ThetaVector next = theta;
  for (int j = 0; j < kRoads; ++j) next.value[j] = theta.value[j] - c * dir[j];
  return next.clamped();
}

struct IterationRecord {
  int k = 0;
  ThetaVector theta;
  double f_mean = 0.0;
  double f_std = 0.0;
  Vec4 q{};
  double c = 0.0;
};

struct OptimizeResult {
  std::vector<IterationRecord> history;
  ThetaVector theta;  // last evaluated point
  double cost = 0.0;
  std::string stop_reason;
};

inline OptimizeResult optimize(const NetworkConfig& net, const ThetaVector& theta0, const CostConfig& cost,
                               const OptimizerConfig& opt) {
  opt.validate();
  theta0.validate();
  OptimizeResult out;
  ThetaVector theta = theta0;
  double initial = 0.0, previous = 0.0;
  int quiet = 0;
  for (int k = 1; k <= opt.max_iterations; ++k) {
    const auto est = estimate_gradient(net, theta, cost, replication_seeds(opt, k), opt.inflow_model, opt.threads);
    const double c = step_size(opt, k);
    out.history.push_back(IterationRecord{k, theta, est.mean, est.stddev, est.gradient, c});
    out.theta = theta;
    out.cost = est.mean;
    if (k == 1) initial = est.mean;
    if (initial > 0.0 && est.mean > opt.divergence_factor * initial) {
      out.stop_reason = "diverged";
      throw NumericError("optimizer diverged at iteration " + std::to_string(k));
    }
    if (max_abs(est.gradient) <= opt.grad_tolerance) {
      out.stop_reason = "gradient";
      return out;
    }
    if (k > 1) {
      quiet = std::abs(est.mean - previous) < opt.cost_tolerance ? quiet + 1 : 0;
      if (quiet >= opt.patience) {
        out.stop_reason = "cost";
        return out;
      }
    }
    previous = est.mean;
    if (k == opt.max_iterations) break;
    theta = descent_step(theta, est.gradient, c, opt.normalization);
  }
  out.stop_reason = "iterations";
  return out;
}

}  // namespace tlc
