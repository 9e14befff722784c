#pragma once

// Browser-side terms: parallel download efficiency (BPE), the parallel
// download rules, and the rendering-time model.

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "webrt/errors.hpp"
#include "webrt/manifest.hpp"
#include "webrt/size_time_model.hpp"

namespace webrt {

enum class Rounding { Raw, NearestInt };

struct BpeInput {
  double first_byte_ms = 0;
  double avg_cd_ms = 0;
  Rounding rounding = Rounding::Raw;
};

/// 1 + first_byte / avg_cd: the in-flight request plus the number of average
/// downloads that fit inside one first-byte wait. NearestInt rounds half up.
inline double bpe(const BpeInput& in) {
  if (!(in.avg_cd_ms > 0)) throw DomainError("average content download time must be positive");
  if (!(in.first_byte_ms >= 0)) throw DomainError("first byte time must be non-negative");
  const double raw = 1.0 + in.first_byte_ms / in.avg_cd_ms;
  return in.rounding == Rounding::NearestInt ? std::floor(raw + 0.5) : raw;
}

inline constexpr std::uint64_t kRule3ThresholdBytes = 25 * 1024;

/// Whether the component's download overlaps with others:
///  - never for the base page (statics are only discovered once it is parsed);
///  - never for JavaScript (the browser blocks on scripts);
///  - never for a component at least 25 KB larger than every other static.
inline bool classify_parallel(const HttpComponent& component, const PageManifest& manifest) {
  if (component.cls == ComponentClass::BasePage) return false;
  if (component.cls == ComponentClass::JavaScript) return false;
  std::uint64_t largest_other = 0;
  for (const auto& c : manifest.components) {
    if (c.cls == ComponentClass::BasePage || c.doc_order == component.doc_order) continue;
    largest_other = std::max(largest_other, c.size_bytes);
  }
  return component.size_bytes < largest_other + kRule3ThresholdBytes;
}

enum class RenderClass { Simple, Medium, Complex };

inline const char* to_string(RenderClass c) {
  switch (c) {
    case RenderClass::Simple: return "simple";
    case RenderClass::Medium: return "medium";
    case RenderClass::Complex: return "complex";
  }
  return "?";
}

/// Rendering equations over total page weight x (KB), result in seconds.
struct RenderModel {
  SizeTimeModel simple = Affine{0.0008, -0.0271};
  SizeTimeModel medium = Log{0.4323, -2.0771};
  SizeTimeModel complex = Log{0.55, -2.6079};
};

/// Page complexity from N = average KB per request: Simple above 16,
/// Complex below 11, Medium on [11, 16].
inline RenderClass render_class(double avg_kb_per_request) {
  if (avg_kb_per_request > 16) return RenderClass::Simple;
  if (avg_kb_per_request < 11) return RenderClass::Complex;
  return RenderClass::Medium;
}

inline double render_time_ms(double total_kb, double avg_kb_per_request, const RenderModel& model = {}) {
  if (!(total_kb > 0)) return 0.0;
  const SizeTimeModel* eq = &model.medium;
  switch (render_class(avg_kb_per_request)) {
    case RenderClass::Simple: eq = &model.simple; break;
    case RenderClass::Medium: break;
    case RenderClass::Complex: eq = &model.complex; break;
  }
  return evaluate(*eq, total_kb) * 1000.0;
}

inline double render_time(const PageAggregates& agg, const RenderModel& model = {}) {
  return render_time_ms(agg.total_kb(), agg.avg_kb_per_request, model);
}

}  // namespace webrt
