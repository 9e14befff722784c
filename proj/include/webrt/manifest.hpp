#pragma once

// Page manifests: the ordered list of HTTP objects that make up one page,
// read from a HAR subset or from a worksheet CSV.

#include <cstdint>
#include <istream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "webrt/errors.hpp"
#include "webrt/text.hpp"

namespace webrt {

enum class ComponentClass { BasePage, JavaScript, OtherStatic };

inline const char* to_string(ComponentClass c) {
  switch (c) {
    case ComponentClass::BasePage: return "base";
    case ComponentClass::JavaScript: return "javascript";
    case ComponentClass::OtherStatic: return "static";
  }
  return "?";
}

struct HttpComponent {
  std::string url;
  std::string domain_key;
  std::string mime;
  std::uint64_t size_bytes = 0;
  ComponentClass cls = ComponentClass::OtherStatic;
  std::optional<double> measured_fb_ms;
  std::optional<double> measured_cd_ms;
  int doc_order = 0;

  friend bool operator==(const HttpComponent&, const HttpComponent&) = default;
};

struct PageManifest {
  std::vector<HttpComponent> components;

  const HttpComponent& base() const { return components.front(); }
  friend bool operator==(const PageManifest&, const PageManifest&) = default;
};

struct PageAggregates {
  int n_static = 0;
  int m_domains = 0;
  int o_js = 0;
  int p_other = 0;
  std::uint64_t total_bytes = 0;
  double avg_kb_per_request = 0;  // N

  double total_kb() const { return static_cast<double>(total_bytes) / 1024.0; }
};

struct ClassifierOptions {
  // A component is JavaScript when its lower-cased mime contains any of these.
  std::vector<std::string> javascript_patterns{"javascript"};
};

/// Host part of an absolute URL, lower-cased, without userinfo or port.
/// Returns an empty string for relative URLs.
inline std::string host_of(std::string_view url) {
  const auto scheme = url.find("://");
  if (scheme == std::string_view::npos) {
    if (url.substr(0, 2) != "//") return {};
    url.remove_prefix(2);
  } else {
    url.remove_prefix(scheme + 3);
  }
  url = url.substr(0, url.find_first_of("/?#"));
  if (const auto at = url.rfind('@'); at != std::string_view::npos) url.remove_prefix(at + 1);
  if (!url.empty() && url.front() == '[') {
    url = url.substr(0, url.find(']') + 1);
  } else if (const auto colon = url.find(':'); colon != std::string_view::npos) {
    url = url.substr(0, colon);
  }
  return text::lower(url);
}

struct RawEntry {
  std::string url;
  std::string mime;
  std::uint64_t size_bytes = 0;
  std::optional<double> fb_ms;
  std::optional<double> cd_ms;
};

/// Assigns doc_order, domain keys and classes. The first entry is the base page;
/// relative URLs take the base page's host.
inline PageManifest build_manifest(const std::vector<RawEntry>& entries,
                                   const ClassifierOptions& options = {}) {
  if (entries.empty()) throw EmptyManifest();
  PageManifest manifest;
  manifest.components.reserve(entries.size());
  const std::string base_host = host_of(entries.front().url);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const RawEntry& e = entries[i];
    HttpComponent c;
    c.url = e.url;
    c.domain_key = host_of(e.url);
    if (c.domain_key.empty()) c.domain_key = base_host;
    c.mime = e.mime;
    c.size_bytes = e.size_bytes;
    c.measured_fb_ms = e.fb_ms;
    c.measured_cd_ms = e.cd_ms;
    c.doc_order = static_cast<int>(i) + 1;
    if (i == 0) {
      c.cls = ComponentClass::BasePage;
    } else {
      const std::string mime = text::lower(e.mime);
      c.cls = ComponentClass::OtherStatic;
      for (const auto& pattern : options.javascript_patterns) {
        if (mime.find(text::lower(pattern)) != std::string::npos) {
          c.cls = ComponentClass::JavaScript;
          break;
        }
      }
    }
    manifest.components.push_back(std::move(c));
  }
  return manifest;
}

inline PageAggregates aggregates(const PageManifest& manifest) {
  PageAggregates agg;
  std::set<std::string> domains;
  for (const auto& c : manifest.components) {
    domains.insert(c.domain_key);
    agg.total_bytes += c.size_bytes;
    if (c.cls == ComponentClass::JavaScript) ++agg.o_js;
    if (c.cls == ComponentClass::OtherStatic) ++agg.p_other;
  }
  agg.n_static = agg.o_js + agg.p_other;
  agg.m_domains = static_cast<int>(domains.size());
  const auto requests = static_cast<double>(manifest.components.size());
  agg.avg_kb_per_request = requests > 0 ? agg.total_kb() / requests : 0.0;
  return agg;
}

/// Kilobits per static request, the "Avg Page Size" column of the browser
/// connection experiments: total_kb * 8 / static_requests.
inline double avg_kilobits_per_request(double total_kb, int static_requests) {
  if (static_requests <= 0) throw DomainError("static request count must be positive");
  return total_kb * 8.0 / static_requests;
}

// ---------------------------------------------------------------------------
// HAR 1.2 subset

namespace detail {

inline std::optional<double> har_timing(const nlohmann::json& timings, const char* key) {
  if (!timings.is_object()) return std::nullopt;
  const auto it = timings.find(key);
  if (it == timings.end() || !it->is_number()) return std::nullopt;
  const double v = it->get<double>();
  if (v < 0) return std::nullopt;  // HAR uses -1 for "not applicable"
  return v;
}

}  // namespace detail

/// Reads log.entries[].request.url, response.content.{mimeType,size} and
/// timings.{wait,receive} (as first-byte and content-download times).
inline PageManifest parse_har(std::string_view bytes, const ClassifierOptions& options = {}) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed HAR: ") + e.what(), e.byte);
  }
  const auto fail = [](const std::string& what) -> ParseError {
    return ParseError("malformed HAR: " + what, 0);
  };
  if (!doc.is_object() || !doc.contains("log") || !doc["log"].is_object()) throw fail("missing log");
  const auto& log = doc["log"];
  if (!log.contains("entries") || !log["entries"].is_array()) throw fail("missing log.entries");

  std::vector<RawEntry> entries;
  std::size_t index = 0;
  for (const auto& entry : log["entries"]) {
    const std::string where = "entry " + std::to_string(index++);
    if (!entry.is_object()) throw fail(where + " is not an object");
    const auto request = entry.value("request", nlohmann::json::object());
    if (!request.contains("url") || !request["url"].is_string()) throw fail(where + " has no request.url");
    RawEntry raw;
    raw.url = request["url"].get<std::string>();
    const auto response = entry.value("response", nlohmann::json::object());
    const auto content = response.is_object() ? response.value("content", nlohmann::json::object())
                                              : nlohmann::json::object();
    if (content.contains("mimeType") && content["mimeType"].is_string()) {
      raw.mime = content["mimeType"].get<std::string>();
    }
    if (content.contains("size")) {
      const auto& size = content["size"];
      if (!size.is_number_integer() || size.get<std::int64_t>() < 0) {
        throw fail(where + " has an invalid response.content.size");
      }
      raw.size_bytes = size.get<std::uint64_t>();
    }
    if (entry.contains("timings")) {
      raw.fb_ms = detail::har_timing(entry["timings"], "wait");
      raw.cd_ms = detail::har_timing(entry["timings"], "receive");
    }
    entries.push_back(std::move(raw));
  }
  return build_manifest(entries, options);
}

// ---------------------------------------------------------------------------
// Worksheet CSV: url,mime,size_bytes,cd_ms,fb_ms

inline constexpr std::string_view kWorksheetHeader = "url,mime,size_bytes,cd_ms,fb_ms";

inline PageManifest parse_worksheet_csv(std::istream& in, const ClassifierOptions& options = {}) {
  std::string line;
  std::size_t row = 0;
  bool have_header = false;
  std::vector<RawEntry> entries;
  while (std::getline(in, line)) {
    ++row;
    if (row == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (text::trim(line).empty()) continue;
    if (text::trim(line) == kWorksheetHeader) {
      if (have_header) throw ParseError("duplicate header at row " + std::to_string(row), row);
      have_header = true;
      continue;
    }
    if (!have_header) throw ParseError("expected header '" + std::string(kWorksheetHeader) + "'", row);
    const auto fields = text::split_csv(line);
    if (fields.size() != 5) {
      throw ParseError("row " + std::to_string(row) + ": expected 5 fields, got " +
                           std::to_string(fields.size()), row);
    }
    RawEntry raw;
    raw.url = std::string(text::trim(fields[0]));
    raw.mime = std::string(text::trim(fields[1]));
    const auto size = text::parse_int(fields[2]);
    if (!size || *size < 0) {
      throw ParseError("row " + std::to_string(row) + ": size_bytes is not a non-negative integer", row);
    }
    raw.size_bytes = static_cast<std::uint64_t>(*size);
    const auto timing = [&](const std::string& field, const char* name) -> std::optional<double> {
      if (text::trim(field).empty()) return std::nullopt;
      const auto v = text::parse_double(field);
      if (!v || *v < 0) {
        throw ParseError("row " + std::to_string(row) + ": " + name + " is not a non-negative number", row);
      }
      return v;
    };
    raw.cd_ms = timing(fields[3], "cd_ms");
    raw.fb_ms = timing(fields[4], "fb_ms");
    entries.push_back(std::move(raw));
  }
  if (!have_header) throw ParseError("missing header", 0);
  return build_manifest(entries, options);
}

inline PageManifest parse_worksheet_csv(std::string_view bytes, const ClassifierOptions& options = {}) {
  std::istringstream in{std::string(bytes)};
  return parse_worksheet_csv(in, options);
}

inline std::string serialize_worksheet_csv(const PageManifest& manifest) {
  std::string out(kWorksheetHeader);
  out += '\n';
  for (const auto& c : manifest.components) {
    out += text::quote_csv(c.url);
    out += ',';
    out += text::quote_csv(c.mime);
    out += ',';
    out += std::to_string(c.size_bytes);
    out += ',';
    if (c.measured_cd_ms) out += text::shortest(*c.measured_cd_ms);
    out += ',';
    if (c.measured_fb_ms) out += text::shortest(*c.measured_fb_ms);
    out += '\n';
  }
  return out;
}

}  // namespace webrt
