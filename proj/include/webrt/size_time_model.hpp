#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <type_traits>
#include <variant>

#include "webrt/errors.hpp"

namespace webrt {

/// y = slope * x + intercept
struct Affine {
  double slope = 0;
  double intercept = 0;
  friend bool operator==(const Affine&, const Affine&) = default;
};

/// y = a * ln(x) + b, defined for x > 0
struct Log {
  double a = 0;
  double b = 0;
  friend bool operator==(const Log&, const Log&) = default;
};

struct Constant {
  double c = 0;
  friend bool operator==(const Constant&, const Constant&) = default;
};

/// Regression of a time (ms unless stated otherwise) over a size.
using SizeTimeModel = std::variant<Affine, Log, Constant>;

inline const char* form_name(const SizeTimeModel& model) {
  return std::visit(
      [](const auto& m) -> const char* {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Affine>) return "affine";
        else if constexpr (std::is_same_v<T, Log>) return "log";
        else return "constant";
      },
      model);
}

/// Raw formula value at `x`, clamped to >= 0. Log needs x > 0.
inline double evaluate(const SizeTimeModel& model, double x) {
  const double y = std::visit(
      [x](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Affine>) {
          return m.slope * x + m.intercept;
        } else if constexpr (std::is_same_v<T, Log>) {
          if (!(x > 0)) throw DomainError("log model evaluated at non-positive size");
          return m.a * std::log(x) + m.b;
        } else {
          return m.c;
        }
      },
      model);
  return std::max(0.0, y);
}

/// Milliseconds for an object of `size_bytes`. Log form rejects size 0.
inline double eval_model(const SizeTimeModel& model, std::uint64_t size_bytes) {
  if (std::holds_alternative<Log>(model) && size_bytes == 0) {
    throw DomainError("log model requires size >= 1 byte");
  }
  return evaluate(model, static_cast<double>(size_bytes));
}

}  // namespace webrt
