#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace webrt {

// Base of every error raised by the library. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  // `location` is a byte offset for JSON input and a 1-based row for CSV input.
  ParseError(const std::string& what, std::size_t location)
      : Error(what), location_(location) {}
  std::size_t location() const noexcept { return location_; }

 private:
  std::size_t location_;
};

class EmptyManifest : public Error {
 public:
  EmptyManifest() : Error("manifest has no components") {}
};

// Raised with the name of the offending field or parameter.
class NamedError : public Error {
 public:
  NamedError(const std::string& prefix, std::string name)
      : Error(prefix + ": " + name), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class SchemaError : public NamedError {
 public:
  explicit SchemaError(std::string field) : NamedError("schema error", std::move(field)) {}
};

class ValidationError : public NamedError {
 public:
  explicit ValidationError(std::string field) : NamedError("invalid value", std::move(field)) {}
};

class DegenerateFit : public NamedError {
 public:
  explicit DegenerateFit(std::string parameter = "fit")
      : NamedError("degenerate fit", std::move(parameter)) {}
};

class EmptyColumn : public NamedError {
 public:
  explicit EmptyColumn(std::string parameter = "column")
      : NamedError("no values", std::move(parameter)) {}
};

class ProfileIncomplete : public NamedError {
 public:
  explicit ProfileIncomplete(std::string parameter)
      : NamedError("profile has no model for", std::move(parameter)) {}
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class IncompleteManifest : public Error {
 public:
  explicit IncompleteManifest(int doc_order)
      : Error("component " + std::to_string(doc_order) + " has no measured fb/cd time"),
        doc_order_(doc_order) {}
  int doc_order() const noexcept { return doc_order_; }

 private:
  int doc_order_;
};

}  // namespace webrt
