#pragma once

// Discrete-event simulation of a page download over k browser connections.
// No bandwidth contention: every download takes fb + cd regardless of overlap.

#include <algorithm>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "webrt/errors.hpp"
#include "webrt/manifest.hpp"
#include "webrt/text.hpp"

namespace webrt {

struct SimComponent {
  int doc_order = 0;
  double fb_ms = 0;
  double cd_ms = 0;
  bool is_js = false;
  bool is_base = false;  // same barrier semantics as JavaScript

  bool barrier() const { return is_js || is_base; }
  double duration() const { return fb_ms + cd_ms; }
};

struct ScheduledDownload {
  int doc_order = 0;
  double start_ms = 0;
  double end_ms = 0;
  int connection = 0;  // 0-based
};

struct SimResult {
  double makespan_ms = 0;
  std::vector<ScheduledDownload> per_component;  // in doc_order
  int connections_used = 0;
};

/// Greedy schedule in doc_order onto the earliest free connection (lowest
/// index on ties). A barrier waits for every earlier download and blocks every
/// later one until it completes.
inline SimResult simulate(std::span<const SimComponent> components, int k_connections) {
  if (k_connections < 1) throw DomainError("connection count must be >= 1");
  if (components.empty()) throw DomainError("nothing to simulate");

  std::vector<const SimComponent*> order;
  order.reserve(components.size());
  for (const auto& c : components) {
    if (c.fb_ms < 0 || c.cd_ms < 0) throw DomainError("negative download time");
    order.push_back(&c);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const SimComponent* a, const SimComponent* b) { return a->doc_order < b->doc_order; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (order[i]->doc_order == order[i - 1]->doc_order) throw DomainError("duplicate doc_order");
  }

  std::vector<double> free_at(static_cast<std::size_t>(k_connections), 0.0);
  double gate = 0;        // no download may start before the last barrier ends
  double latest_end = 0;  // over everything scheduled so far
  std::set<int> used;
  SimResult result;
  result.per_component.reserve(order.size());
  for (const SimComponent* c : order) {
    const auto conn = static_cast<int>(std::min_element(free_at.begin(), free_at.end()) - free_at.begin());
    double start = std::max(free_at[conn], gate);
    if (c->barrier()) start = std::max(start, latest_end);
    const double end = start + c->duration();
    free_at[conn] = end;
    latest_end = std::max(latest_end, end);
    if (c->barrier()) gate = end;
    used.insert(conn);
    result.per_component.push_back({c->doc_order, start, end, conn});
  }
  result.makespan_ms = latest_end;
  result.connections_used = static_cast<int>(used.size());
  return result;
}

struct SweepPoint {
  int k = 0;
  double makespan_ms = 0;
};

inline std::vector<SweepPoint> sweep(std::span<const SimComponent> components, int k_max) {
  if (k_max < 1) throw DomainError("k_max must be >= 1");
  std::vector<SweepPoint> out;
  for (int k = 1; k <= k_max; ++k) out.push_back({k, simulate(components, k).makespan_ms});
  return out;
}

inline double serial_sum(std::span<const SimComponent> components) {
  double s = 0;
  for (const auto& c : components) s += c.duration();
  return s;
}

/// Serial download time over simulated makespan.
inline double effective_parallelism(std::span<const SimComponent> components, int k) {
  const double makespan = simulate(components, k).makespan_ms;
  if (!(makespan > 0)) throw DomainError("zero makespan");
  return serial_sum(components) / makespan;
}

/// Simulation input from a manifest with measured times. The base page and
/// scripts are barriers.
inline std::vector<SimComponent> sim_components(const PageManifest& manifest) {
  std::vector<SimComponent> out;
  out.reserve(manifest.components.size());
  for (const auto& c : manifest.components) {
    if (!c.measured_fb_ms || !c.measured_cd_ms) throw IncompleteManifest(c.doc_order);
    out.push_back({c.doc_order, *c.measured_fb_ms, *c.measured_cd_ms, c.cls == ComponentClass::JavaScript,
                   c.cls == ComponentClass::BasePage});
  }
  return out;
}

inline constexpr std::string_view kSimComponentsHeader = "doc_order,fb_ms,cd_ms,is_js";

/// Reads `doc_order,fb_ms,cd_ms,is_js` rows; is_js accepts 0/1/true/false.
inline std::vector<SimComponent> read_sim_components(std::istream& in) {
  std::vector<SimComponent> out;
  std::string line;
  std::size_t row = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++row;
    if (text::trim(line).empty()) continue;
    if (!have_header) {
      if (text::trim(line) != kSimComponentsHeader) {
        throw ParseError("expected header '" + std::string(kSimComponentsHeader) + "'", row);
      }
      have_header = true;
      continue;
    }
    const auto f = text::split_csv(line);
    const auto bad = [&](const char* what) {
      return ParseError("row " + std::to_string(row) + ": " + what, row);
    };
    if (f.size() != 4) throw bad("expected 4 fields");
    const auto order = text::parse_int(f[0]);
    const auto fb = text::parse_double(f[1]);
    const auto cd = text::parse_double(f[2]);
    if (!order || !fb || !cd || *fb < 0 || *cd < 0) throw bad("invalid number");
    const auto js = text::lower(text::trim(f[3]));
    if (js != "0" && js != "1" && js != "true" && js != "false") throw bad("is_js must be 0/1/true/false");
    out.push_back({static_cast<int>(*order), *fb, *cd, js == "1" || js == "true"});
  }
  if (out.empty()) throw ParseError("no components", row);
  return out;
}

inline std::string schedule_csv(const SimResult& result) {
  std::string out = "doc_order,start_ms,end_ms,connection_index\n";
  for (const auto& d : result.per_component) {
    out += std::to_string(d.doc_order) + ',' + text::fixed(d.start_ms) + ',' + text::fixed(d.end_ms) + ',' +
           std::to_string(d.connection) + '\n';
  }
  return out;
}

}  // namespace webrt
