#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tlc/cost.hpp"
#include "tlc/errors.hpp"
#include "tlc/experiments.hpp"
#include "tlc/optimizer.hpp"
#include "tlc/sample.hpp"

namespace tlc {

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  return out;
}

// time, event_type, queue_id, x1..x4, x12
inline void write_trajectory_csv(std::ostream& out, const SampleResult& r) {
  out << "time,event_type,queue_id,x1,x2,x3,x4,x12\n";
  for (std::size_t i = 0; i < r.events.size(); ++i) {
    const auto& e = r.events[i];
    const auto& x = r.event_state[i];
    out << e.time << ',' << to_string(e.kind) << ',' << (e.queue >= 0 ? queue_label(e.queue) : 0);
    for (double v : x) out << ',' << v;
    out << '\n';
  }
}

// time, kind, queue, burst_n, k, alpha_obs, h_obs, x_snapshot
inline void write_event_log_csv(std::ostream& out, const SampleResult& r) {
  out << "time,kind,queue,burst_n,k,alpha_obs,h_obs,x_snapshot\n";
  for (const auto& e : r.events) {
    out << e.time << ',' << to_string(e.kind) << ',' << (e.queue >= 0 ? queue_label(e.queue) : 0) << ','
        << e.burst << ',' << e.k << ',' << e.alpha_obs << ',' << e.h_obs << ',' << e.x_after << '\n';
  }
}

inline void write_derivative_trace_csv(std::ostream& out, const SampleResult& r) {
  static const char* names[kQueues] = {"1", "2", "3", "4", "12"};
  out << "time,kind,queue";
  for (int q = 0; q < kQueues; ++q)
    for (int j = 1; j <= kRoads; ++j) out << ",dx" << names[q] << "_dtheta" << j;
  for (int j = 1; j <= kRoads; ++j) out << ",dtau_dtheta" << j;
  out << '\n';
  for (const auto& t : r.trace) {
    out << t.time << ',' << to_string(t.kind) << ',' << (t.queue >= 0 ? queue_label(t.queue) : 0);
    for (const auto& row : t.xprime)
      for (double v : row) out << ',' << v;
    for (double v : t.tau_prime) out << ',' << v;
    out << '\n';
  }
}

inline void write_cost_header(std::ostream& out) {
  out << "metric,theta_1,theta_2,theta_3,theta_4,F,dF_dtheta_1,dF_dtheta_2,dF_dtheta_3,dF_dtheta_4,seed\n";
}

inline void write_cost_row(std::ostream& out, MetricKind m, const ThetaVector& th, const SampleResult& r,
                           std::uint64_t seed) {
  out << to_string(m);
  for (double v : th.value) out << ',' << v;
  out << ',' << r.value;
  for (double v : r.gradient) out << ',' << v;
  out << ',' << seed << '\n';
}

inline void write_history_csv(std::ostream& out, const OptimizeResult& r) {
  out << "k,theta_1,theta_2,theta_3,theta_4,F_mean,F_std,Q_1,Q_2,Q_3,Q_4,c_k\n";
  for (const auto& h : r.history) {
    out << h.k;
    for (double v : h.theta.value) out << ',' << v;
    out << ',' << h.f_mean << ',' << h.f_std;
    for (double v : h.q) out << ',' << v;
    out << ',' << h.c << '\n';
  }
}

inline void write_sweep_csv(std::ostream& out, MetricKind m, const std::vector<SweepPoint>& pts) {
  out << "metric,L,with_delay_mean,with_delay_se,no_delay_mean,no_delay_se";
  for (const char* tag : {"with", "without"})
    for (int j = 1; j <= kRoads; ++j) out << ",theta_" << tag << '_' << j;
  out << '\n';
  for (const auto& p : pts) {
    out << to_string(m) << ',' << p.segment_length << ',' << p.mean_with << ',' << p.se_with << ',' << p.mean_without
        << ',' << p.se_without;
    for (double v : p.theta_with.value) out << ',' << v;
    for (double v : p.theta_without.value) out << ',' << v;
    out << '\n';
  }
}

inline void write_histogram_csv(std::ostream& out, const std::string& label,
                                const std::array<QueueHistogram, kQueues>& hist, bool header) {
  if (header) out << "theta_label,queue,bin_lower,bin_upper,time_fraction,p_empty,exceedance\n";
  for (int q = 0; q < kQueues; ++q) {
    const auto& h = hist[q];
    const int bins = static_cast<int>(h.time_in_bin.size());
    for (int k = 0; k < bins; ++k) {
      const double lo = k * h.bin_width;
      out << label << ',' << queue_label(q) << ',' << lo << ',';
      if (k == bins - 1) out << "inf";
      else out << lo + h.bin_width;
      out << ',' << (h.total_time > 0 ? h.time_in_bin[k] / h.total_time : 0.0) << ',' << h.p_empty() << ','
          << h.exceedance() << '\n';
    }
  }
}

struct Series {
  std::string name;
  std::string color;
  std::vector<double> x, y;
};

// Minimal static line plot.
inline void write_svg_plot(std::ostream& out, const std::string& title, const std::string& xlabel,
                           const std::string& ylabel, const std::vector<Series>& series) {
  const double W = 640, H = 420, ml = 70, mr = 20, mt = 40, mb = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  y0 = std::min(y0, 0.0);
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n"
      << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n"
      << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2 << ")\" text-anchor=\"middle\">"
      << ylabel << "</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x0 + (x1 - x0) * t / 4, yv = y0 + (y1 - y0) * t / 4;
    out << "<text x=\"" << px(xv) << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"middle\" font-size=\"11\">" << xv
        << "</text>\n"
        << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << yv
        << "</text>\n";
  }
  int idx = 0;
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    out << "\"/>\n";
    out << "<text x=\"" << W - mr - 150 << "\" y=\"" << mt + 16 * (idx + 1) << "\" fill=\"" << s.color
        << "\" font-size=\"12\">" << s.name << "</text>\n";
    ++idx;
  }
  out << "</svg>\n";
}

}  // namespace tlc
