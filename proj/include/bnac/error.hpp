#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bnac {

// Error categories surface verbatim as the first token of CLI error lines.
enum class ErrorKind {
  invalid_model,
  parse,
  inconsistent_evidence,
  unsupported_query,
  bound_exceeded,
  budget_exceeded,
  io,
  usage,
  internal,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bnac
