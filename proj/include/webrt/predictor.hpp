#pragma once

// End-to-end response time: base page + CDN statics + server time (+ render),
// with parallelizable statics divided by the browser parallel efficiency.

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "webrt/browser_model.hpp"
#include "webrt/errors.hpp"
#include "webrt/fitting.hpp"
#include "webrt/manifest.hpp"
#include "webrt/network_profile.hpp"
#include "webrt/text.hpp"

namespace webrt {

struct ExplicitBpe {
  double value = 1;
};
struct ComputedBpe {};
using BpeSource = std::variant<ComputedBpe, ExplicitBpe>;

enum class DnsConnectMode {
  SingleCdn,         // one CDN DNS lookup and one connect, added once
  PerDomainOverBpe,  // one DNS per static domain, one connect per static, all over BPE
};

struct PredictionConfig {
  BpeSource bpe_source = ComputedBpe{};
  DnsConnectMode dns_connect_mode = DnsConnectMode::SingleCdn;
  bool include_render = false;
  bool include_server = true;
};

struct BreakdownRow {
  int doc_order = 0;
  std::string url;
  std::string mime;
  std::uint64_t size_bytes = 0;
  ComponentClass cls = ComponentClass::OtherStatic;
  bool parallelizable = false;
  double fb_ms = 0;
  double cd_ms = 0;
  double sum_ms = 0;
};

struct PredictionBreakdown {
  std::vector<BreakdownRow> rows;  // rows[0] is the base page
  double t_dnsbp = 0;
  double t_cbp = 0;
  double t_dnssc = 0;  // DNS term as added to the total
  double t_csc = 0;    // connect term as added to the total
  double t_sr = 0;     // 0 when server time is excluded
  double render_ms = 0;
  double bpe_used = 1;
  double total_ms = 0;

  double static_sum_ms() const {
    double s = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) s += rows[i].sum_ms;
    return s;
  }
};

namespace detail {

struct RowTimes {
  double fb = 0;
  double cd = 0;
};

inline double resolve_bpe(const BpeSource& source, double static_fb_ms, double avg_static_cd_ms,
                          bool have_statics) {
  if (const auto* e = std::get_if<ExplicitBpe>(&source)) {
    if (!(e->value >= 1)) throw DomainError("explicit BPE must be >= 1");
    return e->value;
  }
  // no statics, or nothing to download: parallelism cannot help
  if (!have_statics || !(avg_static_cd_ms > 0)) return 1.0;
  return bpe({static_fb_ms, avg_static_cd_ms, Rounding::Raw});
}

inline PredictionBreakdown assemble(const PageManifest& manifest, const std::vector<RowTimes>& times,
                                    const NetworkProfile& profile, const PredictionConfig& config,
                                    double bpe_used) {
  PredictionBreakdown out;
  out.bpe_used = bpe_used;
  out.t_dnsbp = profile.t_dnsbp_ms;
  out.t_cbp = profile.t_cbp_ms;
  out.t_sr = config.include_server ? profile.t_sr_ms : 0.0;

  std::set<std::string> static_domains;
  std::size_t n_static = 0;
  out.rows.reserve(manifest.components.size());
  for (std::size_t i = 0; i < manifest.components.size(); ++i) {
    const auto& c = manifest.components[i];
    BreakdownRow row;
    row.doc_order = c.doc_order;
    row.url = c.url;
    row.mime = c.mime;
    row.size_bytes = c.size_bytes;
    row.cls = c.cls;
    row.parallelizable = classify_parallel(c, manifest);
    row.fb_ms = times[i].fb;
    row.cd_ms = times[i].cd;
    row.sum_ms = row.parallelizable ? (row.fb_ms + row.cd_ms) / bpe_used : row.fb_ms + row.cd_ms;
    if (c.cls != ComponentClass::BasePage) {
      static_domains.insert(c.domain_key);
      ++n_static;
    }
    out.rows.push_back(std::move(row));
  }

  switch (config.dns_connect_mode) {
    case DnsConnectMode::SingleCdn:
      out.t_dnssc = profile.t_dnssc_ms;
      out.t_csc = profile.t_csc_ms;
      break;
    case DnsConnectMode::PerDomainOverBpe:
      out.t_dnssc = static_cast<double>(static_domains.size()) * profile.t_dnssc_ms / bpe_used;
      out.t_csc = static_cast<double>(n_static) * profile.t_csc_ms / bpe_used;
      break;
  }

  if (config.include_render) out.render_ms = render_time(aggregates(manifest));

  out.total_ms = out.t_dnsbp + out.t_cbp + out.rows.front().sum_ms + out.t_dnssc + out.t_csc + out.t_sr +
                 out.static_sum_ms() + out.render_ms;
  return out;
}

}  // namespace detail

/// Prediction from measured per-component FB/CD times (worksheet mode).
/// A computed BPE uses the mean measured static FB and CD.
inline PredictionBreakdown predict_worksheet(const PageManifest& manifest, const NetworkProfile& profile,
                                             const PredictionConfig& config) {
  if (manifest.components.empty()) throw EmptyManifest();
  std::vector<detail::RowTimes> times;
  times.reserve(manifest.components.size());
  MeanAccumulator static_fb, static_cd;
  for (const auto& c : manifest.components) {
    if (!c.measured_fb_ms || !c.measured_cd_ms) throw IncompleteManifest(c.doc_order);
    times.push_back({*c.measured_fb_ms, *c.measured_cd_ms});
    if (c.cls != ComponentClass::BasePage) {
      static_fb.add(*c.measured_fb_ms);
      static_cd.add(*c.measured_cd_ms);
    }
  }
  const double bpe_used = detail::resolve_bpe(config.bpe_source, static_fb.mean().value_or(0),
                                              static_cd.mean().value_or(0), static_fb.count() > 0);
  return detail::assemble(manifest, times, profile, config, bpe_used);
}

/// Prediction from component sizes through the profile's size models.
/// A computed BPE uses the static FB model at the mean static size and the
/// mean synthesized static CD.
inline PredictionBreakdown predict_from_sizes(const PageManifest& manifest, const NetworkProfile& profile,
                                              const PredictionConfig& config) {
  if (manifest.components.empty()) throw EmptyManifest();
  const auto need = [](const std::optional<SizeTimeModel>& m, const char* name) -> const SizeTimeModel& {
    if (!m) throw ProfileIncomplete(name);
    return *m;
  };
  const auto& fbbp = need(profile.fbbp_model, "fbbp_model");
  const auto& cdbp = need(profile.cdbp_model, "cdbp_model");
  const bool have_statics = manifest.components.size() > 1;
  const SizeTimeModel* fbsc = have_statics ? &need(profile.fbsc_model, "fbsc_model") : nullptr;
  const SizeTimeModel* cdsc = have_statics ? &need(profile.cdsc_model, "cdsc_model") : nullptr;

  std::vector<detail::RowTimes> times;
  times.reserve(manifest.components.size());
  MeanAccumulator static_size, static_cd;
  for (const auto& c : manifest.components) {
    if (c.cls == ComponentClass::BasePage) {
      times.push_back({eval_model(fbbp, c.size_bytes), eval_model(cdbp, c.size_bytes)});
    } else {
      times.push_back({eval_model(*fbsc, c.size_bytes), eval_model(*cdsc, c.size_bytes)});
      static_size.add(static_cast<double>(c.size_bytes));
      static_cd.add(times.back().cd);
    }
  }
  double static_fb = 0;
  if (have_statics && std::holds_alternative<ComputedBpe>(config.bpe_source)) {
    static_fb = evaluate(*fbsc, std::max(1.0, *static_size.mean()));
  }
  const double bpe_used =
      detail::resolve_bpe(config.bpe_source, static_fb, static_cd.mean().value_or(0), have_statics);
  return detail::assemble(manifest, times, profile, config, bpe_used);
}

/// |total - measured| / measured * 100
inline double compare(const PredictionBreakdown& prediction, double measured_ms) {
  return error_pct(prediction.total_ms, measured_ms);
}

inline double compare(double predicted_ms, double measured_ms) { return error_pct(predicted_ms, measured_ms); }

// ---------------------------------------------------------------------------
// Reports

inline std::vector<std::pair<std::string, std::string>> summary_lines(const PredictionBreakdown& b,
                                                                      const PredictionConfig& config) {
  using text::fixed;
  std::vector<std::pair<std::string, std::string>> lines;
  lines.emplace_back("BROWSER PARALLEL EFFICIENCY", fixed(b.bpe_used));
  lines.emplace_back("T_dnsbp", fixed(b.t_dnsbp));
  lines.emplace_back("T_cbp", fixed(b.t_cbp));
  lines.emplace_back("T_fbbp + T_cdbp", fixed(b.rows.front().sum_ms));
  lines.emplace_back("T_dnssc", fixed(b.t_dnssc));
  lines.emplace_back("T_csc", fixed(b.t_csc));
  lines.emplace_back("Sum of static components (" + std::to_string(b.rows.size() - 1) + ")",
                     fixed(b.static_sum_ms()));
  if (config.include_server) lines.emplace_back("T_sr", fixed(b.t_sr));
  if (config.include_render) lines.emplace_back("T_r", fixed(b.render_ms));
  lines.emplace_back("Total Response Time (predicted)", fixed(b.total_ms));
  return lines;
}

inline std::string render_table(const PredictionBreakdown& b, const PredictionConfig& config,
                                std::optional<double> measured_ms = std::nullopt) {
  struct Cells {
    std::string no, url, type, size, cd, fb, sum;
  };
  std::vector<Cells> cells;
  cells.push_back({"#", "HTTP Component", "Type", "Size (Bytes)", "CD (ms)", "FB (ms)", "SUM (ms)"});
  for (const auto& r : b.rows) {
    cells.push_back({std::to_string(r.doc_order), r.url, r.mime.empty() ? "-" : r.mime,
                     std::to_string(r.size_bytes), text::fixed(r.cd_ms), text::fixed(r.fb_ms),
                     text::fixed(r.sum_ms) + (r.parallelizable ? "" : " *")});
  }
  std::size_t w[7] = {};
  for (const auto& c : cells) {
    const std::string* f[7] = {&c.no, &c.url, &c.type, &c.size, &c.cd, &c.fb, &c.sum};
    for (int i = 0; i < 7; ++i) w[i] = std::max(w[i], f[i]->size());
  }
  const auto pad_left = [](const std::string& s, std::size_t width) {
    return std::string(width - s.size(), ' ') + s;
  };
  const auto pad_right = [](const std::string& s, std::size_t width) {
    return s + std::string(width - s.size(), ' ');
  };
  std::string out;
  for (const auto& c : cells) {
    std::string line = pad_left(c.no, w[0]) + "  " + pad_right(c.url, w[1]) + "  " + pad_right(c.type, w[2]) +
                       "  " + pad_left(c.size, w[3]) + "  " + pad_left(c.cd, w[4]) + "  " + pad_left(c.fb, w[5]) +
                       "  " + c.sum;
    out += line + "\n";
  }
  out += "(* = not divided by BPE)\n\n";
  for (const auto& [label, value] : summary_lines(b, config)) out += label + " " + value + "\n";
  if (measured_ms) {
    out += "Measured Response Time (actual) " + text::fixed(*measured_ms) + "\n";
    out += "Predicted vs Actual " + text::fixed(compare(b, *measured_ms)) + "%\n";
  }
  return out;
}

inline std::string render_csv(const PredictionBreakdown& b, const PredictionConfig& config,
                              std::optional<double> measured_ms = std::nullopt) {
  std::string out = "url,type,size,cd_ms,fb_ms,sum_ms\n";
  for (const auto& r : b.rows) {
    out += text::quote_csv(r.url) + ',' + text::quote_csv(r.mime) + ',' + std::to_string(r.size_bytes) + ',' +
           text::fixed(r.cd_ms) + ',' + text::fixed(r.fb_ms) + ',' + text::fixed(r.sum_ms) + '\n';
  }
  for (const auto& [label, value] : summary_lines(b, config)) out += text::quote_csv(label) + ",,,,," + value + "\n";
  if (measured_ms) {
    out += "Measured Response Time (actual),,,,," + text::fixed(*measured_ms) + "\n";
    out += "Predicted vs Actual (%),,,,," + text::fixed(compare(b, *measured_ms)) + "\n";
  }
  return out;
}

}  // namespace webrt
