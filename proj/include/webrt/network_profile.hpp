#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include <json.hpp>

#include "webrt/errors.hpp"
#include "webrt/size_time_model.hpp"

namespace webrt {

inline constexpr double kDefaultServerTimeMs = 200.0;

/// Per-country constants and size models for every network term of the
/// transmission-time equation. An empty model means it could not be derived.
struct NetworkProfile {
  std::string country;
  double t_dnsbp_ms = 0;
  double t_cbp_ms = 0;
  std::optional<SizeTimeModel> fbbp_model;  // network only, server time excluded
  std::optional<SizeTimeModel> cdbp_model;
  double t_dnssc_ms = 0;
  double t_csc_ms = 0;
  std::optional<SizeTimeModel> fbsc_model;
  std::optional<SizeTimeModel> cdsc_model;
  double t_sr_ms = kDefaultServerTimeMs;

  friend bool operator==(const NetworkProfile&, const NetworkProfile&) = default;
};

namespace detail {

inline nlohmann::json model_to_json(const std::optional<SizeTimeModel>& model) {
  if (!model) return nullptr;
  nlohmann::json j;
  j["form"] = form_name(*model);
  if (const auto* m = std::get_if<Affine>(&*model)) {
    j["slope"] = m->slope;
    j["intercept"] = m->intercept;
  } else if (const auto* m = std::get_if<Log>(&*model)) {
    j["a"] = m->a;
    j["b"] = m->b;
  } else {
    j["c"] = std::get<Constant>(*model).c;
  }
  return j;
}

inline double number_field(const nlohmann::json& obj, const std::string& key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path);
  if (!it->is_number()) throw ValidationError(path);
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw ValidationError(path);
  return v;
}

inline void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed,
                           const std::string& prefix) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw SchemaError(prefix + key);
  }
}

inline std::optional<SizeTimeModel> model_from_json(const nlohmann::json& j, const std::string& name) {
  if (j.is_null()) return std::nullopt;
  if (!j.is_object()) throw ValidationError(name);
  const auto form = j.find("form");
  if (form == j.end()) throw SchemaError(name + ".form");
  if (!form->is_string()) throw ValidationError(name + ".form");
  const std::string f = form->get<std::string>();
  if (f == "affine") {
    reject_unknown(j, {"form", "slope", "intercept"}, name + ".");
    return Affine{number_field(j, "slope", name + ".slope"), number_field(j, "intercept", name + ".intercept")};
  }
  if (f == "log") {
    reject_unknown(j, {"form", "a", "b"}, name + ".");
    return Log{number_field(j, "a", name + ".a"), number_field(j, "b", name + ".b")};
  }
  if (f == "constant") {
    reject_unknown(j, {"form", "c"}, name + ".");
    const double c = number_field(j, "c", name + ".c");
    if (c < 0) throw ValidationError(name + ".c");
    return Constant{c};
  }
  throw ValidationError(name + ".form");
}

}  // namespace detail

inline nlohmann::json profile_to_json(const NetworkProfile& p) {
  nlohmann::json out;
  out["country"] = p.country;
  out["t_dnsbp_ms"] = p.t_dnsbp_ms;
  out["t_cbp_ms"] = p.t_cbp_ms;
  out["fbbp_model"] = detail::model_to_json(p.fbbp_model);
  out["cdbp_model"] = detail::model_to_json(p.cdbp_model);
  out["t_dnssc_ms"] = p.t_dnssc_ms;
  out["t_csc_ms"] = p.t_csc_ms;
  out["fbsc_model"] = detail::model_to_json(p.fbsc_model);
  out["cdsc_model"] = detail::model_to_json(p.cdsc_model);
  out["t_sr_ms"] = p.t_sr_ms;
  return out;
}

/// JSON text with keys sorted; doubles are written in shortest round-trip form.
inline std::string save_profile(const NetworkProfile& profile) {
  return profile_to_json(profile).dump(2) + "\n";
}

/// Every key except t_sr_ms (default 200) is required; unknown keys are rejected.
inline NetworkProfile load_profile(std::string_view bytes) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed profile: ") + e.what(), e.byte);
  }
  if (!j.is_object()) throw ParseError("profile must be a JSON object", 0);
  detail::reject_unknown(j,
                         {"country", "t_dnsbp_ms", "t_cbp_ms", "fbbp_model", "cdbp_model", "t_dnssc_ms",
                          "t_csc_ms", "fbsc_model", "cdsc_model", "t_sr_ms"},
                         "");

  NetworkProfile p;
  const auto country = j.find("country");
  if (country == j.end()) throw SchemaError("country");
  if (!country->is_string()) throw ValidationError("country");
  p.country = country->get<std::string>();

  const auto constant = [&](const char* key) {
    const double v = detail::number_field(j, key, key);
    if (v < 0) throw ValidationError(key);
    return v;
  };
  const auto model = [&](const char* key) {
    if (!j.contains(key)) throw SchemaError(key);
    return detail::model_from_json(j[key], key);
  };
  p.t_dnsbp_ms = constant("t_dnsbp_ms");
  p.t_cbp_ms = constant("t_cbp_ms");
  p.fbbp_model = model("fbbp_model");
  p.cdbp_model = model("cdbp_model");
  p.t_dnssc_ms = constant("t_dnssc_ms");
  p.t_csc_ms = constant("t_csc_ms");
  p.fbsc_model = model("fbsc_model");
  p.cdsc_model = model("cdsc_model");
  p.t_sr_ms = j.contains("t_sr_ms") ? constant("t_sr_ms") : kDefaultServerTimeMs;
  return p;
}

}  // namespace webrt
