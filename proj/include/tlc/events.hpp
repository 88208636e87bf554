#pragma once

#include <array>
#include <string>
#include <vector>

#include "tlc/config.hpp"
#include "tlc/lights.hpp"

namespace tlc {

enum class EventKind {
  kArrival,      // exogenous vehicle arrival
  kGamma,        // inflow exceeds outflow at an empty queue (Gamma_i)
  kStart,        // S_i: start of a non-empty period
  kEnd,          // E_i: end of a non-empty period
  kGreenToRed,   // G2R_i
  kRedToGreen,   // R2G_i
  kJoin,         // J_k; k = 0 is the burst leaving node 1, final = actual joining
  kTransitStart, // S_12
  kTransitEnd,   // E_12
  kThresholdUp,  // Z_i
  kThresholdDown,// Z-bar_i
  kMerge,        // J_{n,n-1}
  kServerEmpty,  // E_d: one burst left the transit segment
  kFull,         // content reached capacity
};

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::kArrival: return "A";
    case EventKind::kGamma: return "Gamma";
    case EventKind::kStart: return "S";
    case EventKind::kEnd: return "E";
    case EventKind::kGreenToRed: return "G2R";
    case EventKind::kRedToGreen: return "R2G";
    case EventKind::kJoin: return "J";
    case EventKind::kTransitStart: return "S12";
    case EventKind::kTransitEnd: return "E12";
    case EventKind::kThresholdUp: return "Z";
    case EventKind::kThresholdDown: return "Zbar";
    case EventKind::kMerge: return "Jmerge";
    case EventKind::kServerEmpty: return "Ed";
    case EventKind::kFull: return "Full";
  }
  return "?";
}

// Printable queue id: roads 1..4, transit 12.
inline int queue_label(int q) { return q == kTransit ? 12 : q + 1; }

struct EventRecord {
  EventKind kind = EventKind::kArrival;
  double time = 0.0;
  int queue = -1;   // 0..3 roads, 4 transit, -1 none
  int burst = -1;   // burst id for transit events
  int k = 0;        // J_k index
  bool final = false;  // J_K (burst joined queue 2)
  double alpha_obs = 0.0;
  double h_obs = 0.0;
  double x_after = 0.0;  // content of `queue` right after the event
};

struct BurstView {
  int id = -1;
  double content = 0.0;
  bool open = false;        // still receiving road-1 outflow
  double gap = 0.0;         // delta_12
  double estimate = 0.0;    // x-bar_2
  double clock_origin = 0.0;  // time of the last sigma_k
  double speed = 1.0;
  double sigma0 = 0.0;
  int k = 0;
  bool gap_clamped = false;  // gap was clamped to "join now" at this step
};

// Observable state of the network at one instant.
struct Snapshot {
  double time = 0.0;
  Vec4 x{};
  std::array<bool, kRoads> busy{};  // in a non-empty period
  std::array<bool, kRoads> full{};  // frozen at capacity
  LightState green{};
  bool attached = false;  // road-1 outflow routed straight into queue 2
  std::vector<BurstView> bursts;
  Vec4 h_obs{};
  Vec4 alpha_obs{};
  std::array<bool, kQueues> above{};  // threshold indicators r_i

  double transit() const {
    double s = 0.0;
    for (const auto& b : bursts) s += b.content;
    return s;
  }
  double content(int q) const { return q == kTransit ? transit() : x[q]; }
  const BurstView* find_burst(int id) const {
    for (const auto& b : bursts)
      if (b.id == id) return &b;
    return nullptr;
  }
};

// Everything that happens at one event instant. The primary record carries
// the cause; `records` lists the primary followed by induced events.
struct EventStep {
  std::vector<EventRecord> records;
  Snapshot pre;
  Snapshot post;

  const EventRecord& primary() const { return records.front(); }
  double time() const { return records.front().time; }
};

}  // namespace tlc
