#include <algorithm>
#include <charconv>
#include <cmath>

#include "hvx/interp.hpp"
#include "hvx/reader.hpp"
#include "internal.hpp"

namespace hvx {

using detail::brief;
using detail::is_symbol;
using detail::names;
using detail::sym;

namespace {

using Args = std::span<const Value>;

[[noreturn]] void type_error(std::string_view fn, std::string_view expected, const Value& got) {
  throw Error(ErrorKind::type, std::string(fn) + " expects " + std::string(expected) + ", got " +
                                   std::string(kind_name(got.kind())) + " " + brief(got));
}

const Value& number(std::string_view fn, const Value& v) {
  if (!v.is_number()) type_error(fn, "a number", v);
  return v;
}

std::int64_t integer(std::string_view fn, const Value& v) {
  if (!v.is(Kind::integer)) type_error(fn, "an integer", v);
  return v.as_int();
}

const std::string& string_arg(std::string_view fn, const Value& v) {
  if (!v.is(Kind::string)) type_error(fn, "a string", v);
  return v.as_string();
}

// Elements of anything seqable: nil, lists, vectors, maps (as [k v] pairs) and
// strings (as one-character strings).
Vec seq_items(std::string_view fn, const Value& v) {
  switch (v.kind()) {
    case Kind::nil: return {};
    case Kind::list:
    case Kind::vector: return v.items();
    case Kind::map: {
      Vec out;
      for (const auto& [k, x] : v.entries()) out.push_back(Value::vector({k, x}));
      return out;
    }
    case Kind::string: {
      Vec out;
      const std::string& s = v.as_string();
      for (std::size_t i = 0; i < s.size();) {
        std::size_t len = 1;
        auto c = static_cast<unsigned char>(s[i]);
        if (c >= 0xF0) len = 4;
        else if (c >= 0xE0) len = 3;
        else if (c >= 0xC0) len = 2;
        out.push_back(Value::string(s.substr(i, len)));
        i += len;
      }
      return out;
    }
    default: type_error(fn, "a collection", v);
  }
}

Value arith(char op, const Value& a, const Value& b) {
  std::string_view name(&op, 1);
  number(name, a);
  number(name, b);
  if (a.is(Kind::integer) && b.is(Kind::integer)) {
    std::int64_t x = a.as_int(), y = b.as_int(), r = 0;
    bool overflow = false;
    switch (op) {
      case '+': overflow = __builtin_add_overflow(x, y, &r); break;
      case '-': overflow = __builtin_sub_overflow(x, y, &r); break;
      case '*': overflow = __builtin_mul_overflow(x, y, &r); break;
      case '/':
        if (y == 0) throw Error(ErrorKind::runtime, "divide by zero");
        if (x == INT64_MIN && y == -1) {
          overflow = true;
          break;
        }
        if (x % y == 0) return Value::integer(x / y);
        return Value::floating(static_cast<double>(x) / static_cast<double>(y));
    }
    if (overflow) throw Error(ErrorKind::runtime, "integer overflow");
    return Value::integer(r);
  }
  double x = a.as_number(), y = b.as_number();
  switch (op) {
    case '+': return Value::floating(x + y);
    case '-': return Value::floating(x - y);
    case '*': return Value::floating(x * y);
    default: return Value::floating(x / y);
  }
}

int compare_numbers(const Value& a, const Value& b) {
  if (a.is(Kind::integer) && b.is(Kind::integer)) return a.as_int() < b.as_int() ? -1 : (a.as_int() > b.as_int() ? 1 : 0);
  double x = a.as_number(), y = b.as_number();
  return x < y ? -1 : (x > y ? 1 : 0);
}

// Ordering used by sort: numbers, strings, keywords and symbols, each among
// their own kind.
bool sort_less(const Value& a, const Value& b) {
  if (a.is_number() && b.is_number()) return compare_numbers(a, b) < 0;
  if (a.kind() != b.kind()) type_error("sort", "values of one comparable kind", b);
  switch (a.kind()) {
    case Kind::string: return a.as_string() < b.as_string();
    case Kind::keyword:
    case Kind::symbol: return a.as_name().str() < b.as_name().str();
    default: type_error("sort", "numbers, strings, keywords or symbols", a);
  }
}

Value get(const Value& coll, const Value& key, const Value& fallback = Value()) {
  switch (coll.kind()) {
    case Kind::map:
      if (const Value* v = coll.find(key)) return *v;
      return fallback;
    case Kind::vector:
      if (key.is(Kind::integer) && key.as_int() >= 0 && static_cast<std::size_t>(key.as_int()) < coll.items().size()) {
        return coll.items()[static_cast<std::size_t>(key.as_int())];
      }
      return fallback;
    default:
      return fallback;
  }
}

Value assoc_any(const Value& coll, const Value& key, const Value& val) {
  if (coll.is_nil()) return Value::map({{key, val}});
  if (coll.is(Kind::map)) return assoc(coll, key, val);
  if (coll.is(Kind::vector)) {
    if (!key.is(Kind::integer)) type_error("assoc", "an integer index for a vector", key);
    auto i = key.as_int();
    Vec items = coll.items();
    if (i < 0 || static_cast<std::size_t>(i) > items.size()) throw Error(ErrorKind::runtime, "index out of bounds in assoc");
    if (static_cast<std::size_t>(i) == items.size()) {
      items.push_back(val);
    } else {
      items[static_cast<std::size_t>(i)] = val;
    }
    return Value::vector(std::move(items)).with_meta(coll.meta());
  }
  type_error("assoc", "a map, vector or nil", coll);
}

Value assoc_in(const Value& coll, std::span<const Value> path, const Value& val) {
  if (path.empty()) return val;
  Value inner = get(coll, path[0]);
  return assoc_any(coll, path[0], assoc_in(inner, path.subspan(1), val));
}

Value conj1(Interpreter& in, const Value& coll, const Value& x) {
  (void)in;
  switch (coll.kind()) {
    case Kind::nil: return Value::list({x});
    case Kind::vector: {
      Vec items = coll.items();
      items.push_back(x);
      return Value::vector(std::move(items)).with_meta(coll.meta());
    }
    case Kind::list: {
      Vec items;
      items.reserve(coll.items().size() + 1);
      items.push_back(x);
      items.insert(items.end(), coll.items().begin(), coll.items().end());
      return Value::list(std::move(items));
    }
    case Kind::map: {
      if (x.is(Kind::map)) {
        Value out = coll;
        for (const auto& [k, v] : x.entries()) out = assoc(out, k, v);
        return out;
      }
      if (!x.is(Kind::vector) || x.items().size() != 2) type_error("conj", "a [key value] pair for a map", x);
      return assoc(coll, x.items()[0], x.items()[1]);
    }
    default: type_error("conj", "a collection", coll);
  }
}

Value list_or_nil(Vec items) { return items.empty() ? Value() : Value::list(std::move(items)); }

std::string join_display(Args args, const char* sep, bool readable) {
  std::string out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += sep;
    out += readable ? print_datum(args[i]) : display_string(args[i]);
  }
  return out;
}

std::size_t utf8_length(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

// Byte offset of code point `cp` in `s` (or s.size()).
std::size_t utf8_offset(const std::string& s, std::size_t cp) {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) {
      if (seen == cp) return i;
      ++seen;
    }
  }
  return s.size();
}

Value call_fn(Interpreter& in, const Value& f, std::initializer_list<Value> args) {
  Vec v(args);
  return in.apply(f, v);
}

}  // namespace

void Interpreter::install_core() {
  Namespace& core = *core_ns_;
  auto def = [&](const char* name, int lo, int hi, BuiltinFn fn) { define_builtin(core, name, lo, hi, std::move(fn)); };
  auto macro = [&](const char* name, NativeMacro fn) { define_native_macro(core, name, std::move(fn)); };

  // arithmetic
  def("+", 0, -1, [](Interpreter&, Args a) {
    Value acc = Value::integer(0);
    for (const auto& x : a) acc = arith('+', acc, x);
    return acc;
  });
  def("*", 0, -1, [](Interpreter&, Args a) {
    Value acc = Value::integer(1);
    for (const auto& x : a) acc = arith('*', acc, x);
    return acc;
  });
  def("-", 1, -1, [](Interpreter&, Args a) {
    if (a.size() == 1) return arith('-', Value::integer(0), a[0]);
    Value acc = a[0];
    for (std::size_t i = 1; i < a.size(); ++i) acc = arith('-', acc, a[i]);
    return acc;
  });
  def("/", 1, -1, [](Interpreter&, Args a) {
    if (a.size() == 1) return arith('/', Value::integer(1), a[0]);
    Value acc = a[0];
    for (std::size_t i = 1; i < a.size(); ++i) acc = arith('/', acc, a[i]);
    return acc;
  });
  def("inc", 1, 1, [](Interpreter&, Args a) { return arith('+', a[0], Value::integer(1)); });
  def("dec", 1, 1, [](Interpreter&, Args a) { return arith('-', a[0], Value::integer(1)); });
  auto int_div = [](const char* name, int mode) {
    return [name, mode](Interpreter&, Args a) {
      if (a[0].is(Kind::integer) && a[1].is(Kind::integer)) {
        std::int64_t x = a[0].as_int(), y = a[1].as_int();
        if (y == 0) throw Error(ErrorKind::runtime, "divide by zero");
        if (x == INT64_MIN && y == -1) return Value::integer(0);
        if (mode == 0) return Value::integer(x / y);
        std::int64_t r = x % y;
        if (mode == 2 && r != 0 && ((r < 0) != (y < 0))) r += y;
        return Value::integer(r);
      }
      double x = number(name, a[0]).as_number(), y = number(name, a[1]).as_number();
      if (mode == 0) return Value::floating(std::trunc(x / y));
      double r = std::fmod(x, y);
      if (mode == 2 && r != 0 && ((r < 0) != (y < 0))) r += y;
      return Value::floating(r);
    };
  };
  def("quot", 2, 2, int_div("quot", 0));
  def("rem", 2, 2, int_div("rem", 1));
  def("mod", 2, 2, int_div("mod", 2));
  def("max", 1, -1, [](Interpreter&, Args a) {
    Value best = number("max", a[0]);
    for (const auto& x : a.subspan(1)) {
      if (compare_numbers(number("max", x), best) > 0) best = x;
    }
    return best;
  });
  def("min", 1, -1, [](Interpreter&, Args a) {
    Value best = number("min", a[0]);
    for (const auto& x : a.subspan(1)) {
      if (compare_numbers(number("min", x), best) < 0) best = x;
    }
    return best;
  });
  def("abs", 1, 1, [](Interpreter&, Args a) {
    if (a[0].is(Kind::integer)) {
      if (a[0].as_int() == INT64_MIN) throw Error(ErrorKind::runtime, "integer overflow");
      return Value::integer(std::abs(a[0].as_int()));
    }
    return Value::floating(std::fabs(number("abs", a[0]).as_float()));
  });
  def("sqrt", 1, 1, [](Interpreter&, Args a) { return Value::floating(std::sqrt(number("sqrt", a[0]).as_number())); });
  def("floor", 1, 1, [](Interpreter&, Args a) {
    if (a[0].is(Kind::integer)) return a[0];
    return Value::floating(std::floor(number("floor", a[0]).as_number()));
  });

  // comparison
  auto chain = [](const char* name, auto ok) {
    return [name, ok](Interpreter&, Args a) {
      for (std::size_t i = 0; i + 1 < a.size(); ++i) {
        if (!ok(compare_numbers(number(name, a[i]), number(name, a[i + 1])))) return Value::boolean(false);
      }
      if (a.size() == 1) number(name, a[0]);
      return Value::boolean(true);
    };
  };
  def("<", 1, -1, chain("<", [](int c) { return c < 0; }));
  def(">", 1, -1, chain(">", [](int c) { return c > 0; }));
  def("<=", 1, -1, chain("<=", [](int c) { return c <= 0; }));
  def(">=", 1, -1, chain(">=", [](int c) { return c >= 0; }));
  def("=", 1, -1, [](Interpreter&, Args a) {
    for (std::size_t i = 0; i + 1 < a.size(); ++i) {
      if (!values_equal(a[i], a[i + 1])) return Value::boolean(false);
    }
    return Value::boolean(true);
  });
  def("not=", 1, -1, [](Interpreter&, Args a) {
    for (std::size_t i = 0; i + 1 < a.size(); ++i) {
      if (!values_equal(a[i], a[i + 1])) return Value::boolean(true);
    }
    return Value::boolean(false);
  });
  def("not", 1, 1, [](Interpreter&, Args a) { return Value::boolean(!a[0].truthy()); });

  // predicates
  auto pred = [&](const char* name, bool (*p)(const Value&)) {
    def(name, 1, 1, [p](Interpreter&, Args a) { return Value::boolean(p(a[0])); });
  };
  pred("nil?", [](const Value& v) { return v.is_nil(); });
  pred("some?", [](const Value& v) { return !v.is_nil(); });
  pred("true?", [](const Value& v) { return v.is(Kind::boolean) && v.as_bool(); });
  pred("false?", [](const Value& v) { return v.is(Kind::boolean) && !v.as_bool(); });
  pred("boolean?", [](const Value& v) { return v.is(Kind::boolean); });
  pred("number?", [](const Value& v) { return v.is_number(); });
  pred("integer?", [](const Value& v) { return v.is(Kind::integer); });
  pred("float?", [](const Value& v) { return v.is(Kind::floating); });
  pred("string?", [](const Value& v) { return v.is(Kind::string); });
  pred("symbol?", [](const Value& v) { return v.is(Kind::symbol); });
  pred("keyword?", [](const Value& v) { return v.is(Kind::keyword); });
  pred("list?", [](const Value& v) { return v.is(Kind::list); });
  pred("vector?", [](const Value& v) { return v.is(Kind::vector); });
  pred("map?", [](const Value& v) { return v.is(Kind::map); });
  pred("coll?", [](const Value& v) { return v.is_sequential() || v.is(Kind::map); });
  pred("sequential?", [](const Value& v) { return v.is_sequential(); });
  pred("fn?", [](const Value& v) { return v.is(Kind::closure) || v.is(Kind::builtin); });
  pred("atom?", [](const Value& v) { return v.is(Kind::box); });
  def("zero?", 1, 1, [](Interpreter&, Args a) { return Value::boolean(number("zero?", a[0]).as_number() == 0); });
  def("pos?", 1, 1, [](Interpreter&, Args a) { return Value::boolean(number("pos?", a[0]).as_number() > 0); });
  def("neg?", 1, 1, [](Interpreter&, Args a) { return Value::boolean(number("neg?", a[0]).as_number() < 0); });
  def("even?", 1, 1, [](Interpreter&, Args a) { return Value::boolean(integer("even?", a[0]) % 2 == 0); });
  def("odd?", 1, 1, [](Interpreter&, Args a) { return Value::boolean(integer("odd?", a[0]) % 2 != 0); });

  // constructors
  def("list", 0, -1, [](Interpreter&, Args a) { return Value::list(Vec(a.begin(), a.end())); });
  def("vector", 0, -1, [](Interpreter&, Args a) { return Value::vector(Vec(a.begin(), a.end())); });
  def("hash-map", 0, -1, [](Interpreter&, Args a) {
    if (a.size() % 2 != 0) throw Error(ErrorKind::arity, "hash-map expects an even number of arguments");
    MapEntries e;
    for (std::size_t i = 0; i < a.size(); i += 2) e.emplace_back(a[i], a[i + 1]);
    return Value::map(std::move(e));
  });
  def("vec", 1, 1, [](Interpreter&, Args a) { return Value::vector(seq_items("vec", a[0])); });
  def("seq", 1, 1, [](Interpreter&, Args a) { return list_or_nil(seq_items("seq", a[0])); });

  // quasiquote support
  def("qq-list", 0, -1, [](Interpreter& in, Args a) {
    Vec out;
    for (const auto& part : a) {
      Vec items = seq_items("quasiquote splice", part);
      in.charge(items.size());
      out.insert(out.end(), items.begin(), items.end());
    }
    return Value::list(std::move(out));
  });
  def("qq-vector", 0, -1, [](Interpreter& in, Args a) {
    Vec out;
    for (const auto& part : a) {
      Vec items = seq_items("quasiquote splice", part);
      in.charge(items.size());
      out.insert(out.end(), items.begin(), items.end());
    }
    return Value::vector(std::move(out));
  });
  def("qq-map", 0, -1, [](Interpreter&, Args a) {
    Vec flat;
    for (const auto& part : a) {
      Vec items = seq_items("quasiquote splice", part);
      flat.insert(flat.end(), items.begin(), items.end());
    }
    if (flat.size() % 2 != 0) throw Error(ErrorKind::runtime, "quasiquoted map has an odd number of forms");
    MapEntries e;
    for (std::size_t i = 0; i < flat.size(); i += 2) e.emplace_back(flat[i], flat[i + 1]);
    return Value::map(std::move(e));
  });
  def("with-meta", 2, 2, [](Interpreter&, Args a) {
    if (!a[1].is_nil() && !a[1].is(Kind::map)) type_error("with-meta", "a map", a[1]);
    return a[0].with_meta(a[1]);
  });
  def("meta", 1, 1, [](Interpreter&, Args a) { return a[0].meta(); });

  // collections
  def("count", 1, 1, [](Interpreter&, Args a) {
    if (a[0].is(Kind::string)) return Value::integer(static_cast<std::int64_t>(utf8_length(a[0].as_string())));
    if (a[0].is_nil()) return Value::integer(0);
    if (!a[0].is_sequential() && !a[0].is(Kind::map)) type_error("count", "a collection", a[0]);
    return Value::integer(static_cast<std::int64_t>(a[0].count()));
  });
  def("empty?", 1, 1, [](Interpreter&, Args a) {
    if (a[0].is(Kind::string)) return Value::boolean(a[0].as_string().empty());
    return Value::boolean(seq_items("empty?", a[0]).empty());
  });
  def("get", 2, 3, [](Interpreter&, Args a) { return get(a[0], a[1], a.size() == 3 ? a[2] : Value()); });
  def("get-in", 2, 3, [](Interpreter&, Args a) {
    Value cur = a[0];
    for (const auto& k : seq_items("get-in", a[1])) {
      Value next = get(cur, k, Value());
      if (next.is_nil() && !(cur.is(Kind::map) && cur.find(k))) return a.size() == 3 ? a[2] : Value();
      cur = next;
    }
    return cur;
  });
  def("contains?", 2, 2, [](Interpreter&, Args a) {
    if (a[0].is(Kind::map)) return Value::boolean(a[0].find(a[1]) != nullptr);
    if (a[0].is(Kind::vector)) {
      return Value::boolean(a[1].is(Kind::integer) && a[1].as_int() >= 0 &&
                            static_cast<std::size_t>(a[1].as_int()) < a[0].items().size());
    }
    return Value::boolean(false);
  });
  def("assoc", 3, -1, [](Interpreter&, Args a) {
    if ((a.size() - 1) % 2 != 0) throw Error(ErrorKind::arity, "assoc expects key/value pairs");
    Value out = a[0];
    for (std::size_t i = 1; i < a.size(); i += 2) out = assoc_any(out, a[i], a[i + 1]);
    return out;
  });
  def("assoc-in", 3, 3, [](Interpreter&, Args a) {
    Vec path = seq_items("assoc-in", a[1]);
    return assoc_in(a[0], path, a[2]);
  });
  def("dissoc", 1, -1, [](Interpreter&, Args a) {
    if (a[0].is_nil()) return a[0];
    if (!a[0].is(Kind::map)) type_error("dissoc", "a map", a[0]);
    Value out = a[0];
    for (const auto& k : a.subspan(1)) out = dissoc(out, k);
    return out;
  });
  def("update", 3, -1, [](Interpreter& in, Args a) {
    Vec args{get(a[0], a[1])};
    args.insert(args.end(), a.begin() + 3, a.end());
    return assoc_any(a[0], a[1], in.apply(a[2], args));
  });
  def("update-in", 3, -1, [](Interpreter& in, Args a) {
    Vec path = seq_items("update-in", a[1]);
    Value cur = a[0];
    for (const auto& k : path) cur = get(cur, k);
    Vec args{cur};
    args.insert(args.end(), a.begin() + 3, a.end());
    return assoc_in(a[0], path, in.apply(a[2], args));
  });
  def("conj", 1, -1, [](Interpreter& in, Args a) {
    Value out = a[0];
    for (const auto& x : a.subspan(1)) out = conj1(in, out, x);
    return out;
  });
  def("cons", 2, 2, [](Interpreter&, Args a) {
    Vec items{a[0]};
    Vec rest = seq_items("cons", a[1]);
    items.insert(items.end(), rest.begin(), rest.end());
    return Value::list(std::move(items));
  });
  def("first", 1, 1, [](Interpreter&, Args a) {
    if (a[0].is_sequential()) return a[0].items().empty() ? Value() : a[0].items().front();
    Vec items = seq_items("first", a[0]);
    return items.empty() ? Value() : items.front();
  });
  def("second", 1, 1, [](Interpreter&, Args a) {
    Vec items = seq_items("second", a[0]);
    return items.size() < 2 ? Value() : items[1];
  });
  def("last", 1, 1, [](Interpreter&, Args a) {
    Vec items = seq_items("last", a[0]);
    return items.empty() ? Value() : items.back();
  });
  def("rest", 1, 1, [](Interpreter&, Args a) {
    Vec items = seq_items("rest", a[0]);
    if (!items.empty()) items.erase(items.begin());
    return Value::list(std::move(items));
  });
  def("next", 1, 1, [](Interpreter&, Args a) {
    Vec items = seq_items("next", a[0]);
    if (!items.empty()) items.erase(items.begin());
    return list_or_nil(std::move(items));
  });
  def("butlast", 1, 1, [](Interpreter&, Args a) {
    Vec items = seq_items("butlast", a[0]);
    if (!items.empty()) items.pop_back();
    return list_or_nil(std::move(items));
  });
  def("nth", 2, 3, [](Interpreter&, Args a) {
    Vec items = seq_items("nth", a[0]);
    auto i = integer("nth", a[1]);
    if (i < 0 || static_cast<std::size_t>(i) >= items.size()) {
      if (a.size() == 3) return a[2];
      throw Error(ErrorKind::runtime, "index " + std::to_string(i) + " out of bounds");
    }
    return items[static_cast<std::size_t>(i)];
  });
  def("concat", 0, -1, [](Interpreter& in, Args a) {
    Vec out;
    for (const auto& x : a) {
      Vec items = seq_items("concat", x);
      in.charge(items.size());
      out.insert(out.end(), items.begin(), items.end());
    }
    return Value::list(std::move(out));
  });
  def("into", 2, 2, [](Interpreter& in, Args a) {
    Value out = a[0];
    Vec items = seq_items("into", a[1]);
    in.charge(items.size());
    if (out.is(Kind::vector)) {
      Vec v = out.items();
      v.insert(v.end(), items.begin(), items.end());
      return Value::vector(std::move(v)).with_meta(out.meta());
    }
    for (const auto& x : items) out = conj1(in, out, x);
    return out;
  });
  def("reverse", 1, 1, [](Interpreter&, Args a) {
    Vec items = seq_items("reverse", a[0]);
    std::reverse(items.begin(), items.end());
    return Value::list(std::move(items));
  });
  def("range", 0, 3, [](Interpreter& in, Args a) {
    if (a.empty()) throw Error(ErrorKind::arity, "range without bounds is infinite");
    std::int64_t start = 0, end = 0, step = 1;
    if (a.size() == 1) {
      end = integer("range", a[0]);
    } else {
      start = integer("range", a[0]);
      end = integer("range", a[1]);
      if (a.size() == 3) step = integer("range", a[2]);
    }
    if (step == 0) throw Error(ErrorKind::runtime, "range step must not be zero");
    std::uint64_t n = 0;
    if (step > 0 && end > start) n = static_cast<std::uint64_t>((end - start + step - 1) / step);
    if (step < 0 && end < start) n = static_cast<std::uint64_t>((start - end - step - 1) / -step);
    in.charge(n);
    Vec out;
    out.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(Value::integer(start + static_cast<std::int64_t>(i) * step));
    return Value::list(std::move(out));
  });
  def("keys", 1, 1, [](Interpreter&, Args a) {
    if (a[0].is_nil()) return Value();
    if (!a[0].is(Kind::map)) type_error("keys", "a map", a[0]);
    Vec out;
    for (const auto& [k, v] : a[0].entries()) out.push_back(k);
    return list_or_nil(std::move(out));
  });
  def("vals", 1, 1, [](Interpreter&, Args a) {
    if (a[0].is_nil()) return Value();
    if (!a[0].is(Kind::map)) type_error("vals", "a map", a[0]);
    Vec out;
    for (const auto& [k, v] : a[0].entries()) out.push_back(v);
    return list_or_nil(std::move(out));
  });
  def("merge", 0, -1, [](Interpreter&, Args a) {
    Value out;
    for (const auto& m : a) {
      if (m.is_nil()) continue;
      if (!m.is(Kind::map)) type_error("merge", "maps", m);
      if (out.is_nil()) {
        out = m;
        continue;
      }
      for (const auto& [k, v] : m.entries()) out = assoc(out, k, v);
    }
    return out;
  });
  def("select-keys", 2, 2, [](Interpreter&, Args a) {
    MapEntries out;
    for (const auto& k : seq_items("select-keys", a[1])) {
      if (a[0].is(Kind::map)) {
        if (const Value* v = a[0].find(k)) out.emplace_back(k, *v);
      }
    }
    return Value::map(std::move(out));
  });
  def("zipmap", 2, 2, [](Interpreter&, Args a) {
    Vec ks = seq_items("zipmap", a[0]), vs = seq_items("zipmap", a[1]);
    MapEntries out;
    for (std::size_t i = 0; i < std::min(ks.size(), vs.size()); ++i) out.emplace_back(ks[i], vs[i]);
    return Value::map(std::move(out));
  });
  def("distinct", 1, 1, [](Interpreter& in, Args a) {
    Vec out;
    Vec items = seq_items("distinct", a[0]);
    in.charge(items.size() * items.size() / 64 + 1);
    for (const auto& x : items) {
      bool seen = std::any_of(out.begin(), out.end(), [&](const Value& y) { return values_equal(x, y); });
      if (!seen) out.push_back(x);
    }
    return Value::list(std::move(out));
  });
  def("sort", 1, 1, [](Interpreter& in, Args a) {
    Vec items = seq_items("sort", a[0]);
    in.charge(items.size());
    std::stable_sort(items.begin(), items.end(), sort_less);
    return Value::list(std::move(items));
  });
  def("sort-by", 2, 2, [](Interpreter& in, Args a) {
    Vec items = seq_items("sort-by", a[1]);
    std::vector<std::pair<Value, Value>> keyed;
    for (const auto& x : items) keyed.emplace_back(call_fn(in, a[0], {x}), x);
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& l, const auto& r) { return sort_less(l.first, r.first); });
    Vec out;
    for (auto& [k, x] : keyed) out.push_back(x);
    return Value::list(std::move(out));
  });
  def("take", 2, 2, [](Interpreter&, Args a) {
    Vec items = seq_items("take", a[1]);
    auto n = std::max<std::int64_t>(0, integer("take", a[0]));
    if (static_cast<std::size_t>(n) < items.size()) items.resize(static_cast<std::size_t>(n));
    return Value::list(std::move(items));
  });
  def("drop", 2, 2, [](Interpreter&, Args a) {
    Vec items = seq_items("drop", a[1]);
    auto n = std::max<std::int64_t>(0, integer("drop", a[0]));
    items.erase(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(n, items.size())));
    return Value::list(std::move(items));
  });

  // higher order
  def("map", 2, -1, [](Interpreter& in, Args a) {
    std::vector<Vec> colls;
    std::size_t n = SIZE_MAX;
    for (const auto& c : a.subspan(1)) {
      colls.push_back(seq_items("map", c));
      n = std::min(n, colls.back().size());
    }
    Vec out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      Vec args;
      for (const auto& c : colls) args.push_back(c[i]);
      out.push_back(in.apply(a[0], args));
    }
    return Value::list(std::move(out));
  });
  def("mapv", 2, 2, [](Interpreter& in, Args a) {
    Vec out;
    for (const auto& x : seq_items("mapv", a[1])) out.push_back(call_fn(in, a[0], {x}));
    return Value::vector(std::move(out));
  });
  def("map-indexed", 2, 2, [](Interpreter& in, Args a) {
    Vec out;
    std::int64_t i = 0;
    for (const auto& x : seq_items("map-indexed", a[1])) out.push_back(call_fn(in, a[0], {Value::integer(i++), x}));
    return Value::list(std::move(out));
  });
  def("mapcat", 2, 2, [](Interpreter& in, Args a) {
    Vec out;
    for (const auto& x : seq_items("mapcat", a[1])) {
      Vec part = seq_items("mapcat", call_fn(in, a[0], {x}));
      out.insert(out.end(), part.begin(), part.end());
    }
    return Value::list(std::move(out));
  });
  def("filter", 2, 2, [](Interpreter& in, Args a) {
    Vec out;
    for (const auto& x : seq_items("filter", a[1])) {
      if (call_fn(in, a[0], {x}).truthy()) out.push_back(x);
    }
    return Value::list(std::move(out));
  });
  def("remove", 2, 2, [](Interpreter& in, Args a) {
    Vec out;
    for (const auto& x : seq_items("remove", a[1])) {
      if (!call_fn(in, a[0], {x}).truthy()) out.push_back(x);
    }
    return Value::list(std::move(out));
  });
  def("reduce", 2, 3, [](Interpreter& in, Args a) {
    Vec items = seq_items("reduce", a.back());
    Value acc;
    std::size_t i = 0;
    if (a.size() == 3) {
      acc = a[1];
    } else if (items.empty()) {
      return in.apply(a[0], {});
    } else {
      acc = items[i++];
    }
    for (; i < items.size(); ++i) acc = call_fn(in, a[0], {acc, items[i]});
    return acc;
  });
  def("run!", 2, 2, [](Interpreter& in, Args a) {
    for (const auto& x : seq_items("run!", a[1])) call_fn(in, a[0], {x});
    return Value();
  });
  def("some", 2, 2, [](Interpreter& in, Args a) {
    for (const auto& x : seq_items("some", a[1])) {
      Value r = call_fn(in, a[0], {x});
      if (r.truthy()) return r;
    }
    return Value();
  });
  def("every?", 2, 2, [](Interpreter& in, Args a) {
    for (const auto& x : seq_items("every?", a[1])) {
      if (!call_fn(in, a[0], {x}).truthy()) return Value::boolean(false);
    }
    return Value::boolean(true);
  });
  def("apply", 2, -1, [](Interpreter& in, Args a) {
    Vec args(a.begin() + 1, a.end() - 1);
    Vec rest = seq_items("apply", a.back());
    args.insert(args.end(), rest.begin(), rest.end());
    return in.apply(a[0], args);
  });
  def("identity", 1, 1, [](Interpreter&, Args a) { return a[0]; });
  def("constantly", 1, 1, [](Interpreter& in, Args a) {
    Value v = a[0];
    return in.make_builtin("constantly", 0, -1, [v](Interpreter&, Args) { return v; });
  });
  def("comp", 0, -1, [](Interpreter& in, Args a) {
    Vec fns(a.begin(), a.end());
    return in.make_builtin("comp", 0, -1, [fns](Interpreter& inner, Args args) {
      if (fns.empty()) return args.empty() ? Value() : args[0];
      Value v = inner.apply(fns.back(), args);
      for (auto it = fns.rbegin() + 1; it != fns.rend(); ++it) v = call_fn(inner, *it, {v});
      return v;
    });
  });
  def("partial", 1, -1, [](Interpreter& in, Args a) {
    Value f = a[0];
    Vec bound(a.begin() + 1, a.end());
    return in.make_builtin("partial", 0, -1, [f, bound](Interpreter& inner, Args args) {
      Vec all = bound;
      all.insert(all.end(), args.begin(), args.end());
      return inner.apply(f, all);
    });
  });

  // strings and symbols
  def("str", 0, -1, [](Interpreter& in, Args a) {
    std::string out;
    for (const auto& x : a) {
      if (!x.is_nil()) out += display_string(x);
    }
    in.charge(out.size() / 16);
    return Value::string(std::move(out));
  });
  def("subs", 2, 3, [](Interpreter&, Args a) {
    const std::string& s = string_arg("subs", a[0]);
    auto len = static_cast<std::int64_t>(utf8_length(s));
    auto from = integer("subs", a[1]);
    auto to = a.size() == 3 ? integer("subs", a[2]) : len;
    if (from < 0 || to > len || from > to) throw Error(ErrorKind::runtime, "subs index out of range");
    std::size_t b = utf8_offset(s, static_cast<std::size_t>(from));
    std::size_t e = utf8_offset(s, static_cast<std::size_t>(to));
    return Value::string(s.substr(b, e - b));
  });
  def("name", 1, 1, [](Interpreter&, Args a) {
    if (a[0].is(Kind::string)) return a[0];
    if (!a[0].is(Kind::keyword) && !a[0].is(Kind::symbol)) type_error("name", "a keyword, symbol or string", a[0]);
    return Value::string(std::string(a[0].as_name().qualified() ? a[0].as_name().local() : a[0].as_name().str()));
  });
  def("namespace", 1, 1, [](Interpreter&, Args a) {
    if (!a[0].is(Kind::keyword) && !a[0].is(Kind::symbol)) type_error("namespace", "a keyword or symbol", a[0]);
    auto ns = a[0].as_name().ns();
    return ns.empty() ? Value() : Value::string(std::string(ns));
  });
  def("keyword", 1, 2, [](Interpreter&, Args a) {
    if (a.size() == 2) return Value::keyword(string_arg("keyword", a[0]) + "/" + string_arg("keyword", a[1]));
    if (a[0].is(Kind::keyword)) return a[0];
    if (a[0].is(Kind::symbol)) return Value::keyword(a[0].as_name());
    return Value::keyword(string_arg("keyword", a[0]));
  });
  def("symbol", 1, 2, [](Interpreter&, Args a) {
    if (a.size() == 2) return Value::symbol(string_arg("symbol", a[0]) + "/" + string_arg("symbol", a[1]));
    if (a[0].is(Kind::symbol)) return a[0];
    if (a[0].is(Kind::keyword)) return Value::symbol(a[0].as_name());
    return Value::symbol(string_arg("symbol", a[0]));
  });
  def("gensym", 0, 1, [](Interpreter& in, Args a) {
    if (a.empty()) return in.gensym("G");
    return in.gensym(a[0].is(Kind::symbol) ? a[0].as_name().str() : string_arg("gensym", a[0]));
  });
  def("read-string", 1, 1, [](Interpreter& in, Args a) {
    Value v = strip_spans(read_one(string_arg("read-string", a[0])));
    in.note_symbols(v);
    return v;
  });
  def("pr-str", 0, -1, [](Interpreter&, Args a) { return Value::string(join_display(a, " ", true)); });
  def("println", 0, -1, [](Interpreter& in, Args a) {
    in.output() += join_display(a, " ", false) + "\n";
    return Value();
  });
  def("print", 0, -1, [](Interpreter& in, Args a) {
    in.output() += join_display(a, " ", false);
    return Value();
  });
  def("prn", 0, -1, [](Interpreter& in, Args a) {
    in.output() += join_display(a, " ", true) + "\n";
    return Value();
  });
  def("parse-long", 1, 1, [](Interpreter&, Args a) {
    const std::string& s = string_arg("parse-long", a[0]);
    std::int64_t v = 0;
    const char* b = s.data() + (s.size() > 1 && s[0] == '+' ? 1 : 0);
    auto [p, ec] = std::from_chars(b, s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return Value();
    return Value::integer(v);
  });
  def("parse-double", 1, 1, [](Interpreter&, Args a) {
    const std::string& s = string_arg("parse-double", a[0]);
    double v = 0;
    const char* b = s.data() + (s.size() > 1 && s[0] == '+' ? 1 : 0);
    auto [p, ec] = std::from_chars(b, s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return Value();
    return Value::floating(v);
  });

  // atoms
  def("atom", 1, 1, [](Interpreter&, Args a) { return Value::box(a[0]); });
  def("deref", 1, 1, [](Interpreter&, Args a) {
    if (!a[0].is(Kind::box)) type_error("deref", "an atom", a[0]);
    return a[0].as_box().value;
  });
  def("reset!", 2, 2, [](Interpreter&, Args a) {
    if (!a[0].is(Kind::box)) type_error("reset!", "an atom", a[0]);
    a[0].as_box().set(a[1]);
    return a[1];
  });
  def("swap!", 2, -1, [](Interpreter& in, Args a) {
    if (!a[0].is(Kind::box)) type_error("swap!", "an atom", a[0]);
    Vec args{a[0].as_box().value};
    args.insert(args.end(), a.begin() + 2, a.end());
    Value next = in.apply(a[1], args);
    a[0].as_box().set(next);
    return next;
  });

  def("throw", 1, 1, [](Interpreter&, Args a) -> Value { throw Error(ErrorKind::user, display_string(a[0])); });

  // native macros
  const auto& s = names();
  auto arg_forms = [](const Value& form) { return Vec(form.items().begin() + 1, form.items().end()); };
  auto with_body = [](Vec head, const Vec& body, std::size_t from) {
    head.insert(head.end(), body.begin() + static_cast<std::ptrdiff_t>(from), body.end());
    return Value::list(std::move(head));
  };

  macro("defn", [=](Interpreter&, const Value& form) {
    Vec a = arg_forms(form);
    if (a.empty() || !a[0].is(Kind::symbol)) detail::syntax_error(form, "defn expects a name");
    std::size_t at = 1;
    if (at < a.size() && a[at].is(Kind::string)) ++at;
    if (at >= a.size() || !a[at].is(Kind::vector)) detail::syntax_error(form, "defn expects a parameter vector");
    Value fn = with_body({Value::symbol(s.fn), a[0]}, a, at).with_span(form.span());
    return Value::list({Value::symbol(s.def), a[0], fn}).with_span(form.span());
  });
  macro("defn-", [=](Interpreter&, const Value& form) {
    Vec items = form.items();
    items[0] = sym("core/defn");
    return Value::list(items).with_span(form.span());
  });
  macro("when", [=](Interpreter&, const Value& form) {
    Vec a = arg_forms(form);
    if (a.empty()) detail::syntax_error(form, "when expects a test");
    return Value::list({Value::symbol(s.if_), a[0], with_body({Value::symbol(s.do_)}, a, 1)});
  });
  macro("when-not", [=](Interpreter&, const Value& form) {
    Vec a = arg_forms(form);
    if (a.empty()) detail::syntax_error(form, "when-not expects a test");
    return Value::list({Value::symbol(s.if_), a[0], Value(), with_body({Value::symbol(s.do_)}, a, 1)});
  });
  macro("if-not", [=](Interpreter&, const Value& form) {
    Vec a = arg_forms(form);
    if (a.size() < 2 || a.size() > 3) detail::syntax_error(form, "if-not expects a test and branches");
    return Value::list({Value::symbol(s.if_), a[0], a.size() == 3 ? a[2] : Value(), a[1]});
  });
  macro("cond", [=](Interpreter&, const Value& form) {
    Vec a = arg_forms(form);
    if (a.size() % 2 != 0) detail::syntax_error(form, "cond expects test/expression pairs");
    Value out;
    for (std::size_t i = a.size(); i >= 2; i -= 2) out = Value::list({Value::symbol(s.if_), a[i - 2], a[i - 1], out});
    return out;
  });
  macro("and", [=](Interpreter& in, const Value& form) {
    Vec a = arg_forms(form);
    if (a.empty()) return Value::boolean(true);
    Value out = a.back();
    for (std::size_t i = a.size() - 1; i-- > 0;) {
      Value g = in.gensym("and");
      out = Value::list({Value::symbol(s.let), Value::vector({g, a[i]}), Value::list({Value::symbol(s.if_), g, out, g})});
    }
    return out;
  });
  macro("or", [=](Interpreter& in, const Value& form) {
    Vec a = arg_forms(form);
    if (a.empty()) return Value();
    Value out = a.back();
    for (std::size_t i = a.size() - 1; i-- > 0;) {
      Value g = in.gensym("or");
      out = Value::list({Value::symbol(s.let), Value::vector({g, a[i]}), Value::list({Value::symbol(s.if_), g, g, out})});
    }
    return out;
  });
  macro("if-let", [=](Interpreter& in, const Value& form) {
    Vec a = arg_forms(form);
    if (a.size() < 2 || a.size() > 3 || !a[0].is(Kind::vector) || a[0].items().size() != 2) {
      detail::syntax_error(form, "if-let expects [pattern expr] and branches");
    }
    Value g = in.gensym("if-let");
    Value then = Value::list({Value::symbol(s.let), Value::vector({a[0].items()[0], g}), a[1]});
    return Value::list({Value::symbol(s.let), Value::vector({g, a[0].items()[1]}),
                        Value::list({Value::symbol(s.if_), g, then, a.size() == 3 ? a[2] : Value()})});
  });
  macro("when-let", [=](Interpreter&, const Value& form) {
    Vec a = arg_forms(form);
    if (a.empty()) detail::syntax_error(form, "when-let expects a binding");
    return Value::list({sym("core/if-let"), a[0], with_body({Value::symbol(s.do_)}, a, 1)});
  });
  auto threading = [=](bool last) {
    return [=](Interpreter&, const Value& form) {
      Vec a = arg_forms(form);
      if (a.empty()) detail::syntax_error(form, "threading macro expects a value");
      Value acc = a[0];
      for (std::size_t i = 1; i < a.size(); ++i) {
        Vec step = a[i].is(Kind::list) ? a[i].items() : Vec{a[i]};
        if (last || step.size() == 1) {
          step.push_back(acc);
        } else {
          step.insert(step.begin() + 1, acc);
        }
        acc = Value::list(std::move(step)).with_span(a[i].span());
      }
      return acc;
    };
  };
  macro("->", threading(false));
  macro("->>", threading(true));
  macro("comment", [](Interpreter&, const Value&) { return Value(); });
  macro("doseq", [=](Interpreter&, const Value& form) {
    Vec a = arg_forms(form);
    if (a.empty() || !a[0].is(Kind::vector) || a[0].items().size() != 2) {
      detail::syntax_error(form, "doseq expects [binding coll]");
    }
    Value fn = with_body({Value::symbol(s.fn), Value::vector({a[0].items()[0]})}, a, 1);
    return Value::list({sym("core/run!"), fn, a[0].items()[1]});
  });

  // g/let: a let whose binding vector may hold VIsx instances in pattern
  // position; each elaborates to an even-length vector of bindings spliced
  // into place.
  Namespace& g = namespace_named(Name("g"));
  define_native_macro(g, "let", [=](Interpreter& in, const Value& form) {
    Vec a = arg_forms(form);
    if (a.empty() || !a[0].is(Kind::vector)) detail::syntax_error(form, "g/let expects a binding vector");
    Vec bindings;
    const Vec& raw = a[0].items();
    for (std::size_t i = 0; i < raw.size();) {
      const Value& item = raw[i];
      Value m = item.is(Kind::list) && !item.items().empty() ? in.macro_for(item.items()[0]) : Value();
      if (!m.is_nil() && m.as_macro().visx) {
        Value spliced;
        try {
          spliced = in.invoke_macro(m, item);
        } catch (const Error& e) {
          if (e.span() && item.span() && item.span()->encloses(*e.span())) throw;
          throw e.with_span(item.span());
        }
        if (!spliced.is(Kind::vector) || spliced.items().size() % 2 != 0) {
          throw Error(ErrorKind::visx, "instance in g/let must elaborate to an even-length binding vector", item.span());
        }
        bindings.insert(bindings.end(), spliced.items().begin(), spliced.items().end());
        ++i;
        continue;
      }
      if (i + 1 >= raw.size()) detail::syntax_error(a[0], "g/let bindings need an even number of forms");
      bindings.push_back(raw[i]);
      bindings.push_back(raw[i + 1]);
      i += 2;
    }
    Vec out{Value::symbol(s.let), Value::vector(std::move(bindings)).with_span(a[0].span())};
    out.insert(out.end(), a.begin() + 1, a.end());
    return Value::list(std::move(out)).with_span(form.span());
  });
}

}  // namespace hvx
