#pragma once

// Descriptive models of the network terms: means, OLS fits over size, and the
// validation statistics used to compare predictions with measurements.
//
// All accumulators are mergeable: accumulating two partitions separately and
// merging gives the same result (up to rounding) as one pass over the union.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "webrt/errors.hpp"
#include "webrt/network_profile.hpp"
#include "webrt/size_time_model.hpp"
#include "webrt/text.hpp"

namespace webrt {

struct Point {
  double x = 0;
  double y = 0;
};

/// Streaming mean (Welford), mergeable.
class MeanAccumulator {
 public:
  void add(double v) {
    ++n_;
    mean_ += (v - mean_) / static_cast<double>(n_);
  }

  void merge(const MeanAccumulator& other) {
    if (other.n_ == 0) return;
    const auto n = n_ + other.n_;
    mean_ += (other.mean_ - mean_) * (static_cast<double>(other.n_) / static_cast<double>(n));
    n_ = n;
  }

  std::uint64_t count() const { return n_; }
  std::optional<double> mean() const { return n_ ? std::optional<double>(mean_) : std::nullopt; }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0;
};

/// Centered first and second moments of (x, y) pairs; merge uses the pairwise
/// update of Chan et al., so partial accumulations combine associatively.
class OlsAccumulator {
 public:
  void add(double x, double y) {
    ++n_;
    const double n = static_cast<double>(n_);
    const double dx = x - mean_x_;
    const double dy = y - mean_y_;
    mean_x_ += dx / n;
    mean_y_ += dy / n;
    sxx_ += dx * (x - mean_x_);
    sxy_ += dx * (y - mean_y_);
    syy_ += dy * (y - mean_y_);
  }

  void merge(const OlsAccumulator& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(o.n_);
    const double n = na + nb;
    const double dx = o.mean_x_ - mean_x_;
    const double dy = o.mean_y_ - mean_y_;
    sxx_ += o.sxx_ + dx * dx * na * nb / n;
    sxy_ += o.sxy_ + dx * dy * na * nb / n;
    syy_ += o.syy_ + dy * dy * na * nb / n;
    mean_x_ += dx * nb / n;
    mean_y_ += dy * nb / n;
    n_ += o.n_;
  }

  std::uint64_t count() const { return n_; }
  double mean_x() const { return mean_x_; }
  double mean_y() const { return mean_y_; }
  double sxx() const { return sxx_; }
  double sxy() const { return sxy_; }
  double syy() const { return syy_; }

 private:
  std::uint64_t n_ = 0;
  double mean_x_ = 0;
  double mean_y_ = 0;
  double sxx_ = 0;
  double sxy_ = 0;
  double syy_ = 0;
};

struct FitResult {
  SizeTimeModel model;
  double r_squared = 0;
  std::uint64_t n_points = 0;
};

namespace detail {

// slope/intercept of the OLS line; r^2 = 1 - SS_res / SS_tot (1 for a perfect
// fit of constant data).
inline std::pair<Affine, double> solve_ols(const OlsAccumulator& acc, const std::string& parameter) {
  if (acc.count() < 2) throw DegenerateFit(parameter);
  // x spread below rounding noise of the mean counts as all-equal
  const double scale = std::max(1.0, std::abs(acc.mean_x()));
  if (!(acc.sxx() > 1e-24 * scale * scale * static_cast<double>(acc.count()))) throw DegenerateFit(parameter);
  const double slope = acc.sxy() / acc.sxx();
  const double intercept = acc.mean_y() - slope * acc.mean_x();
  const double ss_res = std::max(0.0, acc.syy() - slope * acc.sxy());
  double r2 = 1.0;
  if (acc.syy() > 0) r2 = std::clamp(1.0 - ss_res / acc.syy(), 0.0, 1.0);
  return {Affine{slope, intercept}, r2};
}

}  // namespace detail

inline FitResult fit_affine(const OlsAccumulator& acc, const std::string& parameter = "fit") {
  const auto [line, r2] = detail::solve_ols(acc, parameter);
  return {line, r2, acc.count()};
}

/// Ordinary least squares y = slope * x + intercept.
inline FitResult fit_affine(std::span<const Point> points) {
  OlsAccumulator acc;
  for (const auto& p : points) acc.add(p.x, p.y);
  return fit_affine(acc);
}

/// OLS of y on ln(x): y = a * ln(x) + b. All x must be >= 1.
inline FitResult fit_log(std::span<const Point> points) {
  OlsAccumulator acc;
  for (const auto& p : points) {
    if (!(p.x >= 1)) throw DomainError("log fit requires x >= 1");
    acc.add(std::log(p.x), p.y);
  }
  const auto [line, r2] = detail::solve_ols(acc, "fit");
  return {Log{line.slope, line.intercept}, r2, acc.count()};
}

// ---------------------------------------------------------------------------
// Measurement records

enum class MeasurementKind { BasePage, Static };

struct MeasurementRecord {
  std::string url;
  std::string domain;
  std::int64_t size_bytes = 0;
  std::optional<double> dns_ms;
  std::optional<double> connect_ms;
  std::optional<double> fb_ms;
  std::optional<double> cd_ms;
  MeasurementKind kind = MeasurementKind::Static;
};

enum class Column { Dns, Connect, FirstByte, ContentDownload };

inline const std::optional<double>& column_of(const MeasurementRecord& r, Column c) {
  switch (c) {
    case Column::Dns: return r.dns_ms;
    case Column::Connect: return r.connect_ms;
    case Column::FirstByte: return r.fb_ms;
    case Column::ContentDownload: break;
  }
  return r.cd_ms;
}

/// Mean over the records where `column` is present.
inline double mean_of(Column column, std::span<const MeasurementRecord> records) {
  MeanAccumulator acc;
  for (const auto& r : records) {
    if (const auto& v = column_of(r, column)) acc.add(*v);
  }
  if (!acc.mean()) throw EmptyColumn();
  return *acc.mean();
}

struct FirstByteSample {
  double fb_ms = 0;
  double server_ms = 0;
};

/// Network-only base-page first byte: mean over properties of (fb - server).
/// Negative differences are kept.
inline double derive_first_byte(std::span<const FirstByteSample> samples) {
  if (samples.empty()) throw EmptyColumn("t_fbbp");
  MeanAccumulator acc;
  for (const auto& s : samples) {
    if (s.fb_ms < 0 || s.server_ms < 0) throw DomainError("first byte and server times must be >= 0");
    acc.add(s.fb_ms - s.server_ms);
  }
  return *acc.mean();
}

inline constexpr std::string_view kMeasurementHeader =
    "url,domain,kind,size_bytes,dns_ms,connect_ms,fb_ms,cd_ms";

/// Streams a measurement CSV, calling `sink` once per record. Constant memory.
inline std::uint64_t read_measurements(std::istream& in,
                                       const std::function<void(const MeasurementRecord&)>& sink) {
  std::string line;
  std::size_t row = 0;
  bool have_header = false;
  std::uint64_t count = 0;
  MeasurementRecord r;
  while (std::getline(in, line)) {
    ++row;
    if (row == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    const auto trimmed = text::trim(line);
    if (trimmed.empty()) continue;
    if (!have_header) {
      if (trimmed != kMeasurementHeader) {
        throw ParseError("expected header '" + std::string(kMeasurementHeader) + "'", row);
      }
      have_header = true;
      continue;
    }
    const auto fields = text::split_csv(line);
    const auto bad = [&](const std::string& what) {
      return ParseError("row " + std::to_string(row) + ": " + what, row);
    };
    if (fields.size() != 8) throw bad("expected 8 fields");
    r.url = fields[0];
    r.domain = fields[1];
    const auto kind = text::lower(text::trim(fields[2]));
    if (kind == "base" || kind == "basepage" || kind == "base_page") {
      r.kind = MeasurementKind::BasePage;
    } else if (kind == "static") {
      r.kind = MeasurementKind::Static;
    } else {
      throw bad("kind must be 'base' or 'static'");
    }
    const auto size = text::parse_int(fields[3]);
    if (!size || *size < 0) throw bad("size_bytes is not a non-negative integer");
    r.size_bytes = *size;
    const auto timing = [&](const std::string& f, const char* name) -> std::optional<double> {
      if (text::trim(f).empty()) return std::nullopt;
      const auto v = text::parse_double(f);
      if (!v || *v < 0) throw bad(std::string(name) + " is not a non-negative number");
      return v;
    };
    r.dns_ms = timing(fields[4], "dns_ms");
    r.connect_ms = timing(fields[5], "connect_ms");
    r.fb_ms = timing(fields[6], "fb_ms");
    r.cd_ms = timing(fields[7], "cd_ms");
    if (!r.dns_ms && !r.connect_ms && !r.fb_ms && !r.cd_ms) throw bad("no timing field present");
    sink(r);
    ++count;
  }
  if (!have_header) throw ParseError("missing header", 0);
  return count;
}

inline std::string measurement_csv_row(const MeasurementRecord& r) {
  const auto opt = [](const std::optional<double>& v) { return v ? text::shortest(*v) : std::string(); };
  return text::quote_csv(r.url) + ',' + text::quote_csv(r.domain) + ',' +
         (r.kind == MeasurementKind::BasePage ? "base" : "static") + ',' + std::to_string(r.size_bytes) +
         ',' + opt(r.dns_ms) + ',' + opt(r.connect_ms) + ',' + opt(r.fb_ms) + ',' + opt(r.cd_ms);
}

// ---------------------------------------------------------------------------
// Profile derivation

/// Server processing time per base-page property, keyed by base-page url.
using ServerTimes = std::map<std::string, double>;

/// Single-pass, constant-memory derivation of a NetworkProfile. State grows only
/// with the number of distinct base-page urls (properties).
class ProfileBuilder {
 public:
  void add(const MeasurementRecord& r) {
    if (r.kind == MeasurementKind::BasePage) {
      if (r.dns_ms) base_dns_.add(*r.dns_ms);
      if (r.connect_ms) base_connect_.add(*r.connect_ms);
      if (r.fb_ms) base_fb_[r.url].add(*r.fb_ms);
      if (r.cd_ms) base_cd_.add(static_cast<double>(r.size_bytes), *r.cd_ms);
    } else {
      if (r.dns_ms) static_dns_.add(*r.dns_ms);
      if (r.connect_ms) static_connect_.add(*r.connect_ms);
      if (r.fb_ms) static_fb_.add(static_cast<double>(r.size_bytes), *r.fb_ms);
      if (r.cd_ms) static_cd_.add(static_cast<double>(r.size_bytes), *r.cd_ms);
    }
  }

  void merge(const ProfileBuilder& o) {
    base_dns_.merge(o.base_dns_);
    base_connect_.merge(o.base_connect_);
    base_cd_.merge(o.base_cd_);
    for (const auto& [url, acc] : o.base_fb_) base_fb_[url].merge(acc);
    static_dns_.merge(o.static_dns_);
    static_connect_.merge(o.static_connect_);
    static_fb_.merge(o.static_fb_);
    static_cd_.merge(o.static_cd_);
  }

  /// Errors name the profile parameter that could not be derived.
  NetworkProfile finish(const ServerTimes& server_times, const std::string& country) const {
    const auto mean = [](const MeanAccumulator& acc, const char* name) {
      if (!acc.mean()) throw EmptyColumn(name);
      return *acc.mean();
    };
    NetworkProfile p;
    p.country = country;
    p.t_dnsbp_ms = mean(base_dns_, "t_dnsbp");
    p.t_cbp_ms = mean(base_connect_, "t_cbp");

    std::vector<FirstByteSample> samples;
    for (const auto& [url, acc] : base_fb_) {
      const auto it = server_times.find(url);
      samples.push_back({*acc.mean(), it == server_times.end() ? kDefaultServerTimeMs : it->second});
    }
    if (samples.empty()) throw EmptyColumn("fbbp_model");
    p.fbbp_model = Constant{derive_first_byte(samples)};
    p.cdbp_model = fit_affine(base_cd_, "cdbp_model").model;

    p.t_dnssc_ms = mean(static_dns_, "t_dnssc");
    p.t_csc_ms = mean(static_connect_, "t_csc");
    p.fbsc_model = fit_affine(static_fb_, "fbsc_model").model;
    p.cdsc_model = fit_affine(static_cd_, "cdsc_model").model;
    return p;
  }

 private:
  MeanAccumulator base_dns_, base_connect_, static_dns_, static_connect_;
  std::map<std::string, MeanAccumulator> base_fb_;
  OlsAccumulator base_cd_, static_fb_, static_cd_;
};

inline NetworkProfile build_profile(std::span<const MeasurementRecord> records, const ServerTimes& server_times,
                                    const std::string& country) {
  ProfileBuilder b;
  for (const auto& r : records) b.add(r);
  return b.finish(server_times, country);
}

inline NetworkProfile build_profile(std::istream& measurements_csv, const ServerTimes& server_times,
                                    const std::string& country) {
  ProfileBuilder b;
  read_measurements(measurements_csv, [&](const MeasurementRecord& r) { b.add(r); });
  return b.finish(server_times, country);
}

// ---------------------------------------------------------------------------
// Validation statistics

struct ValidationStats {
  std::vector<double> per_row_error_pct;
  double mean_error_pct = 0;
  double stddev_error_pct = 0;  // sample (n - 1)
  bool stddev_defined = false;  // false when n == 1
};

struct PredictionPair {
  double predicted_ms = 0;
  double measured_ms = 0;
};

inline double error_pct(double predicted, double measured) {
  if (!(measured > 0)) throw DomainError("measured time must be positive");
  return std::abs(predicted - measured) / measured * 100.0;
}

inline ValidationStats validate(std::span<const PredictionPair> pairs) {
  if (pairs.empty()) throw EmptyColumn("pairs");
  ValidationStats s;
  s.per_row_error_pct.reserve(pairs.size());
  for (const auto& p : pairs) s.per_row_error_pct.push_back(error_pct(p.predicted_ms, p.measured_ms));
  const double n = static_cast<double>(pairs.size());
  double sum = 0;
  for (double e : s.per_row_error_pct) sum += e;
  s.mean_error_pct = sum / n;
  if (pairs.size() > 1) {
    double ss = 0;
    for (double e : s.per_row_error_pct) ss += (e - s.mean_error_pct) * (e - s.mean_error_pct);
    s.stddev_error_pct = std::sqrt(ss / (n - 1));
    s.stddev_defined = true;
  }
  return s;
}

/// Reads `predicted_ms,measured_ms` rows (header required).
inline std::vector<PredictionPair> read_pairs_csv(std::istream& in) {
  std::vector<PredictionPair> pairs;
  std::string line;
  std::size_t row = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++row;
    if (row == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (text::trim(line).empty()) continue;
    const auto fields = text::split_csv(line);
    if (!have_header) {
      if (fields.size() < 2 || text::trim(fields[fields.size() - 2]) != "predicted_ms" ||
          text::trim(fields.back()) != "measured_ms") {
        throw ParseError("expected header ending in 'predicted_ms,measured_ms'", row);
      }
      have_header = true;
      continue;
    }
    if (fields.size() < 2) throw ParseError("row " + std::to_string(row) + ": expected 2 values", row);
    const auto predicted = text::parse_double(fields[fields.size() - 2]);
    const auto measured = text::parse_double(fields.back());
    if (!predicted || !measured) throw ParseError("row " + std::to_string(row) + ": non-numeric value", row);
    pairs.push_back({*predicted, *measured});
  }
  if (!have_header) throw ParseError("missing header", 0);
  return pairs;
}

}  // namespace webrt
