#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>

#include "tlc/tlc.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::optional<std::string> metric;
  std::optional<std::string> delay_mode;
  double fd_step = 1e-3;
  double fd_rel = 0.05;
  double fd_abs = 1e-3;
};

tlc::RunConfig load(const Options& o) {
  tlc::RunConfig rc = o.config.empty() ? tlc::RunConfig{} : tlc::load_config(o.config);
  if (o.metric) rc.cost.metric = tlc::parse_metric(*o.metric);
  if (o.delay_mode) rc.network.delay_mode = tlc::parse_delay_mode(*o.delay_mode);
  if (o.seed) rc.optimizer.base_seed = *o.seed;
  rc.network.validate();
  return rc;
}

fs::path prepare(const Options& o) {
  fs::path dir(o.out);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::uint64_t> seeds_from(std::uint64_t base, int n) {
  std::vector<std::uint64_t> s(n);
  std::iota(s.begin(), s.end(), base);
  return s;
}

void print_theta(const char* label, const tlc::ThetaVector& th) {
  std::printf("%s [%.4f, %.4f, %.4f, %.4f]\n", label, th[0], th[1], th[2], th[3]);
}

int cmd_simulate(const Options& o) {
  const auto rc = load(o);
  const auto dir = prepare(o);
  tlc::SampleOptions so;
  so.keep_events = true;
  so.keep_trace = true;
  so.inflow = rc.optimizer.inflow_model;
  const auto seed = rc.optimizer.base_seed;
  const auto r = tlc::run_sample(rc.network, rc.theta, rc.cost, seed, so);
  {
    auto f = tlc::open_output((dir / "trajectory.csv").string());
    tlc::write_trajectory_csv(f, r);
  }
  {
    auto f = tlc::open_output((dir / "events.csv").string());
    tlc::write_event_log_csv(f, r);
  }
  {
    auto f = tlc::open_output((dir / "derivatives.csv").string());
    tlc::write_derivative_trace_csv(f, r);
  }
  auto f = tlc::open_output((dir / "cost.csv").string());
  tlc::write_cost_header(f);
  for (auto m : {tlc::MetricKind::kAverageQueue, tlc::MetricKind::kPower, tlc::MetricKind::kThreshold}) {
    auto cost = rc.cost;
    cost.metric = m;
    const auto rm = tlc::run_sample(rc.network, rc.theta, cost, seed, {rc.optimizer.inflow_model});
    tlc::write_cost_row(f, m, rc.theta, rm, seed);
    std::printf("%-9s F=%.6g dF=[%.6g, %.6g, %.6g, %.6g]\n", tlc::to_string(m), rm.value, rm.gradient[0],
                rm.gradient[1], rm.gradient[2], rm.gradient[3]);
  }
  std::printf("events=%zu bursts=%zu written to %s\n", r.events.size(), r.bursts.size(), dir.string().c_str());
  return 0;
}

int cmd_grad_check(const Options& o) {
  const auto rc = load(o);
  const auto dir = prepare(o);
  if (!(o.fd_step > 0.0)) throw tlc::ConfigError("finite-difference step must be > 0");
  tlc::SampleOptions so;
  so.inflow = rc.optimizer.inflow_model;
  const auto g = tlc::finite_difference_check(rc.network, rc.theta, rc.cost, rc.optimizer.base_seed, o.fd_step, so);
  auto f = tlc::open_output((dir / "grad_check.csv").string());
  f << "coordinate,theta,ipa,fd,rel_error,smooth,within_tolerance\n";
  int failures = 0;
  std::printf("%-3s %10s %14s %14s %10s  status\n", "j", "theta", "IPA", "FD", "rel.err");
  for (int j = 0; j < tlc::kRoads; ++j) {
    const double diff = std::abs(g.ipa[j] - g.fd[j]);
    const double rel = diff / std::max(std::abs(g.fd[j]), 1e-300);
    const bool ok = diff <= o.fd_abs || rel <= o.fd_rel;
    const char* status = !g.smooth[j] ? "non-smooth sample" : ok ? "ok" : "MISMATCH";
    if (g.smooth[j] && !ok) ++failures;
    std::printf("%-3d %10.4f %14.8g %14.8g %10.3g  %s\n", j + 1, rc.theta[j], g.ipa[j], g.fd[j], rel, status);
    f << j + 1 << ',' << rc.theta[j] << ',' << g.ipa[j] << ',' << g.fd[j] << ',' << rel << ',' << g.smooth[j] << ','
      << ok << '\n';
  }
  return failures == 0 ? 0 : 3;
}

int cmd_optimize(const Options& o) {
  const auto rc = load(o);
  const auto dir = prepare(o);
  const auto r = tlc::optimize(rc.network, rc.theta, rc.cost, rc.optimizer);
  auto f = tlc::open_output((dir / "history.csv").string());
  tlc::write_history_csv(f, r);
  std::vector<double> ks, fs_;
  for (const auto& h : r.history) {
    ks.push_back(h.k);
    fs_.push_back(h.f_mean);
  }
  auto svg = tlc::open_output((dir / "history.svg").string());
  tlc::write_svg_plot(svg, std::string("Optimization, ") + tlc::to_string(rc.cost.metric) + " cost", "iteration",
                      "mean cost", {{"F mean", "#1f77b4", ks, fs_}});
  std::printf("iterations=%zu stop=%s initial=%.6g final=%.6g\n", r.history.size(), r.stop_reason.c_str(),
              r.history.front().f_mean, r.cost);
  print_theta("theta*", r.theta);
  return 0;
}

int cmd_sweep(const Options& o) {
  const auto rc = load(o);
  const auto dir = prepare(o);
  const auto eval = seeds_from(rc.optimizer.base_seed + 1000, rc.evaluation_seeds);
  const auto pts = tlc::sweep_segment_length(rc.network, rc.theta, rc.cost, rc.optimizer, rc.sweep_lengths, eval);
  auto f = tlc::open_output((dir / "sweep.csv").string());
  tlc::write_sweep_csv(f, rc.cost.metric, pts);
  tlc::Series with{"with delay", "#d62728", {}, {}}, without{"without delay", "#1f77b4", {}, {}};
  for (const auto& p : pts) {
    with.x.push_back(p.segment_length);
    with.y.push_back(p.mean_with);
    without.x.push_back(p.segment_length);
    without.y.push_back(p.mean_without);
    std::printf("L=%-6g with=%.6g (se %.3g)  without=%.6g (se %.3g)\n", p.segment_length, p.mean_with, p.se_with,
                p.mean_without, p.se_without);
  }
  auto svg = tlc::open_output((dir / "sweep.svg").string());
  tlc::write_svg_plot(svg, std::string("Optimized ") + tlc::to_string(rc.cost.metric) + " cost vs L", "L",
                      "cost", {with, without});
  return 0;
}

int cmd_histograms(const Options& o) {
  const auto rc = load(o);
  const auto dir = prepare(o);
  const auto r = tlc::optimize(rc.network, rc.theta, rc.cost, rc.optimizer);
  const auto eval = seeds_from(rc.optimizer.base_seed + 1000, rc.evaluation_seeds);
  const auto before = tlc::queue_histograms(rc.network, rc.theta, rc.cost.thresholds, eval);
  const auto after = tlc::queue_histograms(rc.network, r.theta, rc.cost.thresholds, eval);
  auto f = tlc::open_output((dir / "histograms.csv").string());
  tlc::write_histogram_csv(f, "theta0", before, true);
  tlc::write_histogram_csv(f, "theta_star", after, false);
  print_theta("theta0", rc.theta);
  print_theta("theta*", r.theta);
  std::printf("%-6s %12s %12s %12s %12s\n", "queue", "P0(x=0)", "exceed0", "P*(x=0)", "exceed*");
  for (int q = 0; q < tlc::kQueues; ++q)
    std::printf("%-6d %12.4f %12.4f %12.4f %12.4f\n", tlc::queue_label(q), before[q].p_empty(), before[q].exceedance(),
                after[q].p_empty(), after[q].exceedance());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-intersection traffic light control with transit delay: simulation, IPA gradients, optimization"};
  app.require_subcommand(1);
  Options o;
  auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "INI config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "base random seed");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--metric", o.metric, "avg | power | threshold")->check(CLI::IsMember({"avg", "power", "threshold"}));
    sub->add_option("--delay-mode", o.delay_mode, "on | off")->check(CLI::IsMember({"on", "off"}));
  };
  auto* sim = app.add_subcommand("simulate", "run one sample path and write trajectory, event log and costs");
  auto* grad = app.add_subcommand("grad-check", "compare IPA with same-seed central finite differences");
  auto* opt = app.add_subcommand("optimize", "projected gradient descent on the green durations");
  auto* sweep = app.add_subcommand("sweep-l", "optimized cost vs segment length, with and without delay");
  auto* hist = app.add_subcommand("histograms", "queue-content histograms at theta0 and the optimized theta");
  for (auto* s : {sim, grad, opt, sweep, hist}) common(s);
  grad->add_option("--fd-step", o.fd_step, "finite-difference step in seconds");
  grad->add_option("--rel-tol", o.fd_rel, "relative tolerance");
  grad->add_option("--abs-tol", o.fd_abs, "absolute tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*sim) return cmd_simulate(o);
    if (*grad) return cmd_grad_check(o);
    if (*opt) return cmd_optimize(o);
    if (*sweep) return cmd_sweep(o);
    if (*hist) return cmd_histograms(o);
  } catch (const tlc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "run error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
