#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tlc/config.hpp"
#include "tlc/errors.hpp"

namespace tlc {

// Everything a run needs, as read from one INI file.
struct RunConfig {
  NetworkConfig network;
  ThetaVector theta;
  CostConfig cost;
  OptimizerConfig optimizer;
  std::vector<double> sweep_lengths{0, 35, 70, 100};
  int evaluation_seeds = 10;
};

namespace detail {

inline std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c); };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

inline double parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "inf" || t == "infinity") return kUnbounded;
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not a number: '" + t + "'");
  }
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(key, item));
  return out;
}

template <std::size_t N>
void read_array(const boost::property_tree::ptree& pt, const std::string& key, std::array<double, N>& dst) {
  if (auto v = pt.get_optional<std::string>(key)) {
    const auto list = parse_list(key, *v);
    if (list.size() == 1) {
      dst.fill(list[0]);
    } else if (list.size() == N) {
      std::copy(list.begin(), list.end(), dst.begin());
    } else {
      throw ConfigError("key '" + key + "': expected " + std::to_string(N) + " values");
    }
  }
}

inline void read_double(const boost::property_tree::ptree& pt, const std::string& key, double& dst) {
  if (auto v = pt.get_optional<std::string>(key)) dst = parse_number(key, *v);
}

inline void read_int(const boost::property_tree::ptree& pt, const std::string& key, int& dst) {
  if (auto v = pt.get_optional<std::string>(key)) {
    const double d = parse_number(key, *v);
    if (d != static_cast<int>(d)) throw ConfigError("key '" + key + "': expected an integer");
    dst = static_cast<int>(d);
  }
}

inline bool parse_bool(const std::string& key, std::string v) {
  v = trim(v);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "off" || v == "no" || v == "0") return false;
  throw ConfigError("key '" + key + "': expected a boolean");
}

inline void read_bool(const boost::property_tree::ptree& pt, const std::string& key, bool& dst) {
  if (auto v = pt.get_optional<std::string>(key)) dst = parse_bool(key, *v);
}

}  // namespace detail

inline MetricKind parse_metric(const std::string& s) {
  const std::string t = detail::trim(s);
  if (t == "avg" || t == "average") return MetricKind::kAverageQueue;
  if (t == "power") return MetricKind::kPower;
  if (t == "threshold") return MetricKind::kThreshold;
  throw ConfigError("unknown metric '" + t + "' (avg|power|threshold)");
}

inline DelayMode parse_delay_mode(const std::string& s) {
  const std::string t = detail::trim(s);
  if (t == "on" || t == "with_delay") return DelayMode::kWithDelay;
  if (t == "off" || t == "no_delay") return DelayMode::kNoDelay;
  throw ConfigError("unknown delay mode '" + t + "' (on|off)");
}

inline InflowModel parse_inflow_model(const std::string& s) {
  const std::string t = detail::trim(s);
  if (t == "impulse") return InflowModel::kImpulse;
  if (t == "estimated") return InflowModel::kEstimated;
  throw ConfigError("unknown inflow model '" + t + "' (impulse|estimated)");
}

inline RunConfig parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  static const std::vector<std::string> sections{"network", "theta", "cost", "optimizer"};
  for (const auto& [name, _] : tree)
    if (std::find(sections.begin(), sections.end(), name) == sections.end())
      throw ConfigError("unknown section [" + name + "]");

  RunConfig rc;
  const pt::ptree empty;
  const auto& net = tree.get_child("network", empty);
  auto& n = rc.network;
  detail::read_array(net, "arrival_rates", n.arrival_rates);
  detail::read_array(net, "departure_rates", n.departure_rates);
  detail::read_double(net, "segment_length", n.segment_length);
  detail::read_double(net, "vehicle_length", n.vehicle_length);
  detail::read_double(net, "burst_speed", n.burst_speed);
  detail::read_double(net, "join_epsilon", n.join_epsilon);
  detail::read_double(net, "horizon", n.horizon);
  detail::read_array(net, "queue_capacities", n.capacities);
  detail::read_array(net, "initial_queues", n.initial_queues);
  detail::read_array(net, "initial_clocks", n.initial_clocks);
  if (auto v = net.get_optional<std::string>("delay_mode")) n.delay_mode = parse_delay_mode(*v);
  detail::read_bool(net, "single_burst", n.single_burst);
  detail::read_double(net, "rate_window", n.rate_window);
  if (auto v = net.get_optional<std::string>("sweep_lengths")) rc.sweep_lengths = detail::parse_list("sweep_lengths", *v);

  const auto& th = tree.get_child("theta", empty);
  detail::read_array(th, "initial", rc.theta.value);
  detail::read_array(th, "min", rc.theta.lower);
  detail::read_array(th, "max", rc.theta.upper);

  const auto& co = tree.get_child("cost", empty);
  if (auto v = co.get_optional<std::string>("metric")) rc.cost.metric = parse_metric(*v);
  detail::read_int(co, "power", rc.cost.power);
  detail::read_array(co, "weights", rc.cost.weights);
  detail::read_array(co, "thresholds", rc.cost.thresholds);

  const auto& op = tree.get_child("optimizer", empty);
  auto& o = rc.optimizer;
  detail::read_double(op, "step0", o.step0);
  detail::read_double(op, "decay", o.decay);
  detail::read_int(op, "replications", o.replications);
  detail::read_int(op, "max_iterations", o.max_iterations);
  detail::read_double(op, "cost_tolerance", o.cost_tolerance);
  detail::read_int(op, "patience", o.patience);
  detail::read_double(op, "grad_tolerance", o.grad_tolerance);
  detail::read_double(op, "divergence_factor", o.divergence_factor);
  detail::read_bool(op, "common_random_numbers", o.common_random_numbers);
  if (auto v = op.get_optional<std::string>("seed")) {
    const double s = detail::parse_number("seed", *v);
    if (s < 0 || s != static_cast<double>(static_cast<std::uint64_t>(s))) throw ConfigError("seed must be a non-negative integer");
    o.base_seed = static_cast<std::uint64_t>(s);
  }
  if (auto v = op.get_optional<std::string>("inflow_model")) o.inflow_model = parse_inflow_model(*v);
  if (auto v = op.get_optional<std::string>("normalize"))
    o.normalization = detail::parse_bool("normalize", *v) ? StepNormalization::kInfNorm : StepNormalization::kNone;
  detail::read_int(op, "threads", o.threads);
  detail::read_int(op, "evaluation_seeds", rc.evaluation_seeds);

  n.validate();
  rc.theta.validate();
  rc.cost.validate();
  o.validate();
  if (rc.evaluation_seeds < 1) throw ConfigError("evaluation_seeds must be >= 1");
  return rc;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

}  // namespace tlc
