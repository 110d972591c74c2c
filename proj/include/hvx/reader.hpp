#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hvx/value.hpp"

namespace hvx {

/// Parses every top-level form of `text`. Each returned datum (and every
/// nested datum that appears literally in the text) carries its byte span.
/// Throws Error(ErrorKind::read) with a zero-width span at the offending
/// byte offset.
std::vector<Value> read_all(std::string_view text);

/// Parses text that must contain exactly one form.
Value read_one(std::string_view text);

/// Canonical single-line rendering. Readable for plain data; runtime objects
/// print as `#<...>` which the reader rejects.
std::string print_datum(const Value& v);

/// Rendering used by `str` and UI text: strings appear without quotes,
/// everything else as print_datum.
std::string display_string(const Value& v);

/// A source text together with its parsed top-level forms.
class Document {
 public:
  Document() = default;
  explicit Document(std::string text);

  const std::string& text() const { return text_; }
  const std::vector<Value>& forms() const { return forms_; }

  /// Replaces the bytes of an existing form's span with `replacement`, which
  /// must itself parse to exactly one form. Bytes outside the span are kept
  /// verbatim.
  Document splice(SourceSpan span, std::string_view replacement) const;

  /// Innermost form whose span contains `offset`; nullopt in inter-form text.
  std::optional<Value> locate(std::size_t offset) const;

  /// Form (at any depth) whose span is exactly `span`.
  std::optional<Value> form_at(SourceSpan span) const;

 private:
  std::string text_;
  std::vector<Value> forms_;
};

/// True when `text` is well-formed UTF-8.
bool valid_utf8(std::string_view text);

/// 1-based line and column (in bytes) of `offset`.
std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t offset);

}  // namespace hvx
