#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "hvx/value.hpp"

namespace hvx {

enum class ErrorKind {
  read,
  expand,
  unbound,
  arity,
  type,
  runtime,
  fuel,     // budget exhausted: callers treat this as a pause, not a crash
  stopped,  // run revoked by stop()
  depth,
  match,
  visx,
  splice,
  session,
  user,
};

std::string_view error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::optional<SourceSpan> span = std::nullopt)
      : std::runtime_error(message), kind_(kind), span_(span) {}

  ErrorKind kind() const { return kind_; }
  const std::optional<SourceSpan>& span() const { return span_; }
  std::string message() const { return what(); }

  Error with_span(std::optional<SourceSpan> span) const { return Error(kind_, what(), span); }

 private:
  ErrorKind kind_;
  std::optional<SourceSpan> span_;
};

}  // namespace hvx
