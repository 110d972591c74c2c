#pragma once

// Helpers shared by the expander, evaluator and builtins.

#include <string>
#include <string_view>

#include "hvx/error.hpp"
#include "hvx/interp.hpp"
#include "hvx/reader.hpp"
#include "hvx/value.hpp"

namespace hvx::detail {

struct Names {
  Name def{"def"}, fn{"fn"}, let{"let"}, if_{"if"}, do_{"do"}, quote{"quote"}, quasiquote{"quasiquote"},
      unquote{"unquote"}, unquote_splicing{"unquote-splicing"}, defmacro{"defmacro"}, defvisx{"defvisx"},
      match{"match"}, ns{"ns"}, declare{"declare"}, amp{"&"}, underscore{"_"};
  // keywords
  Name as{"as"}, keys{"keys"}, or_{"or"}, visx{"visx"}, require{"require"}, state{"state"}, render{"render"},
      elaborate{"elaborate"};
  // core helpers targeted by quasiquote
  Name qq_list{"core/qq-list"}, qq_vector{"core/qq-vector"}, qq_map{"core/qq-map"}, with_meta{"core/with-meta"},
      list{"core/list"};
  Name core{"core"}, user{"user"};
};

inline const Names& names() {
  static const Names n;
  return n;
}

inline bool is_symbol(const Value& v, Name n) { return v.is(Kind::symbol) && v.as_name() == n; }
inline bool is_keyword(const Value& v, Name n) { return v.is(Kind::keyword) && v.as_name() == n; }

inline bool head_is(const Value& form, Name n) {
  return form.is(Kind::list) && !form.items().empty() && is_symbol(form.items()[0], n);
}

/// Same kind of collection as `form`, with new items, keeping meta and span.
inline Value rebuild(const Value& form, Vec items) {
  Value out = form.is(Kind::vector) ? Value::vector(std::move(items)) : Value::list(std::move(items));
  if (form.has_meta()) out = out.with_meta(form.meta());
  return out.with_span(form.span());
}

/// print_datum cut to a length suitable for an error message.
inline std::string brief(const Value& v) {
  std::string s = print_datum(v);
  if (s.size() > 80) s = s.substr(0, 77) + "...";
  return s;
}

[[noreturn]] inline void syntax_error(const Value& form, const std::string& message) {
  throw Error(ErrorKind::expand, message + ": " + brief(form), form.span());
}

inline Value sym(std::string_view s) { return Value::symbol(s); }
inline Value kw(std::string_view s) { return Value::keyword(s); }

}  // namespace hvx::detail

namespace hvx {

struct DepthGuard {
  explicit DepthGuard(Interpreter& interp) : interp_(interp) {
    if (++interp_.depth_ > interp_.options_.max_eval_depth) {
      --interp_.depth_;
      throw Error(ErrorKind::depth, "nesting too deep (limit " + std::to_string(interp_.options_.max_eval_depth) + ")");
    }
  }
  ~DepthGuard() { --interp_.depth_; }
  DepthGuard(const DepthGuard&) = delete;
  DepthGuard& operator=(const DepthGuard&) = delete;

 private:
  Interpreter& interp_;
};

}  // namespace hvx
