#include "hvx/reader.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>

#include "hvx/error.hpp"

namespace hvx {

namespace {

constexpr int kMaxReadNesting = 1000;

bool is_whitespace(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == ','; }

bool is_terminator(char c) {
  return is_whitespace(c) || std::strchr("()[]{}\";`~^@", c) != nullptr || c == '\0';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

[[noreturn]] void fail(std::size_t offset, const std::string& message) {
  throw Error(ErrorKind::read, message + " at offset " + std::to_string(offset), SourceSpan{offset, offset});
}

class Reader {
 public:
  explicit Reader(std::string_view src) : src_(src) {}

  std::vector<Value> read_all() {
    std::vector<Value> forms;
    while (true) {
      skip_ws();
      if (at_end()) break;
      char c = src_[pos_];
      if (c == ')' || c == ']' || c == '}') {
        fail(pos_, std::string("unbalanced delimiter: unexpected '") + c + "'");
      }
      forms.push_back(read_form());
    }
    return forms;
  }

 private:
  bool at_end() const { return pos_ >= src_.size(); }

  void skip_ws() {
    while (!at_end()) {
      char c = src_[pos_];
      if (is_whitespace(c)) {
        ++pos_;
      } else if (c == ';') {
        while (!at_end() && src_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  bool at_form_start() {
    skip_ws();
    if (at_end()) return false;
    char c = src_[pos_];
    return c != ')' && c != ']' && c != '}';
  }

  Value read_form() {
    if (++depth_ > kMaxReadNesting) fail(pos_, "forms nested too deeply");
    Value v = read_form_inner();
    --depth_;
    return v;
  }

  Value read_form_inner() {
    std::size_t start = pos_;
    char c = src_[pos_];
    switch (c) {
      case '(': return read_seq(')', Kind::list);
      case '[': return read_seq(']', Kind::vector);
      case '{': return read_map();
      case '"': return read_string();
      case '\'': return read_prefixed(1, "quote");
      case '`': return read_prefixed(1, "quasiquote");
      case '@': return read_prefixed(1, "deref");
      case '~':
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '@') return read_prefixed(2, "unquote-splicing");
        return read_prefixed(1, "unquote");
      case '^': return read_meta();
      case '\\': fail(start, "character literals are not supported");
      default: return read_token();
    }
  }

  Value read_seq(char close, Kind kind) {
    std::size_t start = pos_;
    char open = src_[pos_++];
    Vec items;
    while (true) {
      skip_ws();
      if (at_end()) fail(start, std::string("unbalanced delimiter: unclosed '") + open + "'");
      char c = src_[pos_];
      if (c == close) {
        ++pos_;
        break;
      }
      if (c == ')' || c == ']' || c == '}') {
        fail(pos_, std::string("unbalanced delimiter: expected '") + close + "' but found '" + c + "'");
      }
      items.push_back(read_form());
    }
    Value v = kind == Kind::list ? Value::list(std::move(items)) : Value::vector(std::move(items));
    return v.with_span(SourceSpan{start, pos_});
  }

  Value read_map() {
    std::size_t start = pos_;
    ++pos_;
    Vec items;
    while (true) {
      skip_ws();
      if (at_end()) fail(start, "unbalanced delimiter: unclosed '{'");
      char c = src_[pos_];
      if (c == '}') break;
      if (c == ')' || c == ']') {
        fail(pos_, std::string("unbalanced delimiter: expected '}' but found '") + c + "'");
      }
      items.push_back(read_form());
    }
    std::size_t close = pos_++;
    if (items.size() % 2 != 0) fail(close, "odd map entry count");
    MapEntries entries;
    for (std::size_t i = 0; i < items.size(); i += 2) {
      for (const auto& e : entries) {
        if (structurally_equal(e.first, items[i])) {
          fail(items[i].span() ? items[i].span()->start : close, "duplicate map key " + print_datum(items[i]));
        }
      }
      entries.emplace_back(items[i], items[i + 1]);
    }
    return Value::map(std::move(entries)).with_span(SourceSpan{start, pos_});
  }

  Value read_string() {
    std::size_t start = pos_++;
    std::string out;
    while (true) {
      if (at_end()) fail(start, "unterminated string");
      char c = src_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (at_end()) fail(start, "unterminated string");
      char e = src_[pos_++];
      switch (e) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        default: fail(pos_ - 2, std::string("unsupported string escape '\\") + e + "'");
      }
    }
    return Value::string(std::move(out)).with_span(SourceSpan{start, pos_});
  }

  Value read_prefixed(std::size_t width, const char* head) {
    std::size_t start = pos_;
    pos_ += width;
    if (!at_form_start()) fail(start, std::string("missing form after '") + std::string(src_.substr(start, width)) + "'");
    Value inner = read_form();
    return Value::list({Value::symbol(head), inner}).with_span(SourceSpan{start, inner.span()->end});
  }

  Value read_meta() {
    std::size_t start = pos_++;
    if (!at_form_start()) fail(start, "dangling metadata");
    Value meta = read_form();
    MapEntries entries;
    switch (meta.kind()) {
      case Kind::map: entries = meta.entries(); break;
      case Kind::keyword: entries.emplace_back(strip_spans(meta), Value::boolean(true)); break;
      case Kind::symbol:
      case Kind::string: entries.emplace_back(Value::keyword("tag"), meta); break;
      default: fail(start, "metadata must be a map, keyword, symbol or string");
    }
    if (!at_form_start()) fail(start, "dangling metadata");
    Value target = read_form();
    // inner metadata (closer to the form) wins on key clashes
    MapEntries merged = entries;
    for (const auto& e : target.meta().entries()) merged.push_back(e);
    Value merged_meta = Value::map(std::move(merged));
    if (meta.is(Kind::map)) merged_meta = merged_meta.with_span(meta.span());
    return target.with_meta(merged_meta).with_span(SourceSpan{start, target.span()->end});
  }

  Value read_token() {
    std::size_t start = pos_;
    while (!at_end() && !is_terminator(src_[pos_])) ++pos_;
    std::string_view tok = src_.substr(start, pos_ - start);
    SourceSpan span{start, pos_};
    if (tok.empty()) fail(start, "unexpected character");
    return parse_token(tok, start).with_span(span);
  }

  Value parse_token(std::string_view tok, std::size_t start) {
    if (tok == "nil") return Value();
    if (tok == "true") return Value::boolean(true);
    if (tok == "false") return Value::boolean(false);
    if (tok[0] == '#') {
      if (tok == "##Inf") return Value::floating(HUGE_VAL);
      if (tok == "##-Inf") return Value::floating(-HUGE_VAL);
      if (tok == "##NaN") return Value::floating(std::nan(""));
      fail(start, "unsupported reader syntax '" + std::string(tok) + "'");
    }
    bool signed_number = (tok[0] == '+' || tok[0] == '-') && tok.size() > 1 && is_digit(tok[1]);
    if (is_digit(tok[0]) || signed_number) return parse_number(tok, start);
    if (tok[0] == ':') {
      if (tok.size() == 1) fail(start, "empty keyword");
      if (tok[1] == ':') fail(start, "auto-resolved keywords are not supported");
      return Value::keyword(tok.substr(1));
    }
    if (tok.back() == '/' && tok.size() > 1) fail(start, "invalid symbol '" + std::string(tok) + "'");
    return Value::symbol(tok);
  }

  Value parse_number(std::string_view tok, std::size_t start) {
    bool is_float = tok.find_first_of(".eE") != std::string_view::npos;
    std::string_view digits = tok;
    if (digits[0] == '+') digits.remove_prefix(1);
    if (!is_float) {
      std::int64_t value = 0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
      if (ec == std::errc::result_out_of_range) fail(start, "integer out of range: " + std::string(tok));
      if (ec != std::errc() || ptr != digits.data() + digits.size()) fail(start, "invalid number: " + std::string(tok));
      return Value::integer(value);
    }
    double value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) fail(start, "invalid number: " + std::string(tok));
    return Value::floating(value);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

// ---------------------------------------------------------------------------
// Printing

void print_string_literal(std::string& out, const std::string& s) {
  out.push_back('"');
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
}

void print_float(std::string& out, double d) {
  if (std::isnan(d)) {
    out += "##NaN";
    return;
  }
  if (std::isinf(d)) {
    out += d > 0 ? "##Inf" : "##-Inf";
    return;
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), d);
  std::string_view text(buf, static_cast<std::size_t>(ptr - buf));
  out += text;
  if (text.find_first_of(".e") == std::string_view::npos) out += ".0";
}

void print_into(std::string& out, const Value& v, bool readable);

void print_items(std::string& out, const Vec& items, bool readable) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out.push_back(' ');
    print_into(out, items[i], readable);
  }
}

void print_into(std::string& out, const Value& v, bool readable) {
  if (v.has_meta() && readable) {
    out.push_back('^');
    print_into(out, v.meta(), readable);
    out.push_back(' ');
  }
  switch (v.kind()) {
    case Kind::nil: out += "nil"; break;
    case Kind::boolean: out += v.as_bool() ? "true" : "false"; break;
    case Kind::integer: out += std::to_string(v.as_int()); break;
    case Kind::floating: print_float(out, v.as_float()); break;
    case Kind::string:
      if (readable) {
        print_string_literal(out, v.as_string());
      } else {
        out += v.as_string();
      }
      break;
    case Kind::symbol: out += v.as_name().str(); break;
    case Kind::keyword:
      out.push_back(':');
      out += v.as_name().str();
      break;
    case Kind::list:
      out.push_back('(');
      print_items(out, v.items(), readable);
      out.push_back(')');
      break;
    case Kind::vector:
      out.push_back('[');
      print_items(out, v.items(), readable);
      out.push_back(']');
      break;
    case Kind::map: {
      out.push_back('{');
      bool first = true;
      for (const auto& [k, x] : v.entries()) {
        if (!first) out.push_back(' ');
        first = false;
        print_into(out, k, readable);
        out.push_back(' ');
        print_into(out, x, readable);
      }
      out.push_back('}');
      break;
    }
    case Kind::closure: out += "#<fn>"; break;
    case Kind::box:
      out += "#<atom ";
      print_into(out, v.as_box().value, readable);
      out.push_back('>');
      break;
    case Kind::builtin: out += "#<builtin " + v.as_builtin().name + ">"; break;
    case Kind::macro: out += "#<macro>"; break;
  }
}

void collect_locate(const Value& v, std::size_t offset, std::optional<Value>& best) {
  auto span = v.span();
  if (!span || !span->contains(offset)) return;
  best = v;
  if (v.is_sequential()) {
    for (const auto& x : v.items()) collect_locate(x, offset, best);
  } else if (v.is(Kind::map)) {
    for (const auto& [k, x] : v.entries()) {
      collect_locate(k, offset, best);
      collect_locate(x, offset, best);
    }
  }
}

bool find_span(const Value& v, SourceSpan target, std::optional<Value>& found) {
  auto span = v.span();
  if (!span || !span->encloses(target)) return false;
  if (*span == target) {
    found = v;
    return true;
  }
  if (v.is_sequential()) {
    for (const auto& x : v.items()) {
      if (find_span(x, target, found)) return true;
    }
  } else if (v.is(Kind::map)) {
    for (const auto& [k, x] : v.entries()) {
      if (find_span(k, target, found) || find_span(x, target, found)) return true;
    }
  }
  return false;
}

}  // namespace

bool valid_utf8(std::string_view text) {
  std::size_t i = 0;
  const auto* s = reinterpret_cast<const unsigned char*>(text.data());
  std::size_t n = text.size();
  while (i < n) {
    unsigned char c = s[i];
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t k = 1; k < len; ++k) {
      if ((s[i + k] & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (s[i + k] & 0x3F);
    }
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000)) return false;
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += len;
  }
  return true;
}

std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

std::vector<Value> read_all(std::string_view text) {
  if (!valid_utf8(text)) fail(0, "source is not valid UTF-8");
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") fail(0, "byte order mark is not allowed");
  return Reader(text).read_all();
}

Value read_one(std::string_view text) {
  auto forms = read_all(text);
  if (forms.size() != 1) {
    throw Error(ErrorKind::read, forms.empty() ? "expected one form, found none"
                                               : "expected one form, found " + std::to_string(forms.size()));
  }
  return forms.front();
}

std::string print_datum(const Value& v) {
  std::string out;
  print_into(out, v, true);
  return out;
}

std::string display_string(const Value& v) {
  if (v.is(Kind::string)) return v.as_string();
  std::string out;
  print_into(out, v, false);
  return out;
}

Document::Document(std::string text) : text_(std::move(text)), forms_(read_all(text_)) {}

Document Document::splice(SourceSpan span, std::string_view replacement) const {
  if (span.end > text_.size() || span.start > span.end) {
    throw Error(ErrorKind::splice, "span out of range", span);
  }
  if (!form_at(span)) throw Error(ErrorKind::splice, "span not on a form boundary", span);
  std::vector<Value> parsed;
  try {
    parsed = read_all(replacement);
  } catch (const Error& e) {
    throw Error(ErrorKind::splice, std::string("replacement fails to parse: ") + e.what(), span);
  }
  if (parsed.size() != 1) {
    throw Error(ErrorKind::splice,
                parsed.empty() ? "replacement parses to zero forms"
                               : "replacement parses to " + std::to_string(parsed.size()) + " forms",
                span);
  }
  std::string next;
  next.reserve(text_.size() - span.size() + replacement.size());
  next.append(text_, 0, span.start);
  next.append(replacement);
  next.append(text_, span.end, std::string::npos);
  try {
    return Document(std::move(next));
  } catch (const Error& e) {
    throw Error(ErrorKind::splice, std::string("splice produces an invalid document: ") + e.what(), span);
  }
}

std::optional<Value> Document::locate(std::size_t offset) const {
  std::optional<Value> best;
  for (const auto& f : forms_) {
    collect_locate(f, offset, best);
    if (best) break;
  }
  return best;
}

std::optional<Value> Document::form_at(SourceSpan span) const {
  std::optional<Value> found;
  for (const auto& f : forms_) {
    if (find_span(f, span, found)) break;
  }
  return found;
}

}  // namespace hvx
