#include "hvx/value.hpp"

#include <algorithm>
#include <mutex>
#include <unordered_map>

#include "hvx/error.hpp"
#include "hvx/interp.hpp"

namespace hvx {

// ---------------------------------------------------------------------------
// Name interning

struct Name::Entry {
  std::string text;
  std::size_t slash = std::string::npos;  // separator of a qualified name
};

namespace {

struct NameTable {
  std::mutex mutex;
  std::unordered_map<std::string_view, std::unique_ptr<Name::Entry>> entries;
};

NameTable& name_table() {
  static NameTable table;
  return table;
}

}  // namespace

struct NameAccess {
  static const Name::Entry* intern(std::string_view text) {
    auto& table = name_table();
    std::lock_guard lock(table.mutex);
    if (auto it = table.entries.find(text); it != table.entries.end()) return it->second.get();
    auto entry = std::make_unique<Name::Entry>();
    entry->text = std::string(text);
    auto slash = entry->text.find('/');
    if (slash != std::string::npos && slash > 0 && slash + 1 < entry->text.size()) entry->slash = slash;
    const Name::Entry* raw = entry.get();
    table.entries.emplace(std::string_view(raw->text), std::move(entry));
    return raw;
  }
};

Name::Name() : entry_(NameAccess::intern("")) {}
Name::Name(std::string_view text) : entry_(NameAccess::intern(text)) {}

const std::string& Name::str() const { return entry_->text; }

std::string_view Name::ns() const {
  if (entry_->slash == std::string::npos) return {};
  return std::string_view(entry_->text).substr(0, entry_->slash);
}

std::string_view Name::local() const {
  if (entry_->slash == std::string::npos) return entry_->text;
  return std::string_view(entry_->text).substr(entry_->slash + 1);
}

// ---------------------------------------------------------------------------
// Value nodes

struct Value::Node {
  Kind kind = Kind::nil;
  std::variant<std::monostate, bool, std::int64_t, double, std::string, Name, Vec, MapEntries,
               std::shared_ptr<Closure>, std::shared_ptr<BoxCell>, std::shared_ptr<const Builtin>,
               std::shared_ptr<const Macro>>
      payload;
  Value meta;
  std::optional<SourceSpan> span;
  std::uint32_t depth = 0;
};

std::string_view kind_name(Kind kind) {
  switch (kind) {
    case Kind::nil: return "nil";
    case Kind::boolean: return "boolean";
    case Kind::integer: return "integer";
    case Kind::floating: return "float";
    case Kind::string: return "string";
    case Kind::symbol: return "symbol";
    case Kind::keyword: return "keyword";
    case Kind::list: return "list";
    case Kind::vector: return "vector";
    case Kind::map: return "map";
    case Kind::closure: return "fn";
    case Kind::box: return "atom";
    case Kind::builtin: return "builtin";
    case Kind::macro: return "macro";
  }
  return "?";
}

namespace {

const Value& nil_value() {
  static const Value nil;
  return nil;
}

std::uint32_t child_depth(const Value& v) { return v.depth(); }

void check_depth(std::uint32_t depth) {
  if (depth > kMaxDataDepth) {
    throw Error(ErrorKind::depth, "data nested deeper than " + std::to_string(kMaxDataDepth) + " levels");
  }
}

}  // namespace

Value Value::make(Kind kind, auto payload, std::uint32_t depth) {
  auto node = std::make_shared<Node>();
  node->kind = kind;
  node->payload = std::move(payload);
  node->depth = depth;
  return Value(std::move(node));
}

Value Value::boolean(bool b) { return make(Kind::boolean, b); }
Value Value::integer(std::int64_t i) { return make(Kind::integer, i); }
Value Value::floating(double d) { return make(Kind::floating, d); }
Value Value::string(std::string s) { return make(Kind::string, std::move(s)); }
Value Value::symbol(Name name) { return make(Kind::symbol, name); }
Value Value::keyword(Name name) { return make(Kind::keyword, name); }

Value Value::list(Vec items) {
  std::uint32_t depth = 0;
  for (const auto& item : items) depth = std::max(depth, child_depth(item));
  check_depth(depth + 1);
  return make(Kind::list, std::move(items), depth + 1);
}

Value Value::vector(Vec items) {
  std::uint32_t depth = 0;
  for (const auto& item : items) depth = std::max(depth, child_depth(item));
  check_depth(depth + 1);
  return make(Kind::vector, std::move(items), depth + 1);
}

Value Value::map(MapEntries entries) {
  MapEntries unique;
  unique.reserve(entries.size());
  std::uint32_t depth = 0;
  for (auto& [k, v] : entries) {
    depth = std::max({depth, child_depth(k), child_depth(v)});
    auto it = std::find_if(unique.begin(), unique.end(),
                           [&](const auto& e) { return structurally_equal(e.first, k); });
    if (it != unique.end()) {
      it->second = std::move(v);
    } else {
      unique.emplace_back(std::move(k), std::move(v));
    }
  }
  check_depth(depth + 1);
  return make(Kind::map, std::move(unique), depth + 1);
}

Value Value::closure(std::shared_ptr<Closure> c) { return make(Kind::closure, std::move(c)); }
Value Value::box(Value initial) { return make(Kind::box, std::make_shared<BoxCell>(std::move(initial))); }
Value Value::builtin(std::shared_ptr<const Builtin> b) { return make(Kind::builtin, std::move(b)); }
Value Value::macro(std::shared_ptr<const Macro> m) { return make(Kind::macro, std::move(m)); }

const Value::Node& Value::node() const { return *node_; }

Kind Value::kind() const { return node_ ? node_->kind : Kind::nil; }

bool Value::is_callable() const {
  switch (kind()) {
    case Kind::closure:
    case Kind::builtin:
    case Kind::keyword:
    case Kind::map:
      return true;
    default:
      return false;
  }
}

bool Value::truthy() const {
  if (!node_) return false;
  if (node_->kind == Kind::nil) return false;
  if (node_->kind == Kind::boolean) return std::get<bool>(node_->payload);
  return true;
}

namespace {

[[noreturn]] void wrong_kind(Kind want, Kind got) {
  throw Error(ErrorKind::type,
              "expected " + std::string(kind_name(want)) + ", got " + std::string(kind_name(got)));
}

}  // namespace

bool Value::as_bool() const {
  if (!is(Kind::boolean)) wrong_kind(Kind::boolean, kind());
  return std::get<bool>(node_->payload);
}

std::int64_t Value::as_int() const {
  if (!is(Kind::integer)) wrong_kind(Kind::integer, kind());
  return std::get<std::int64_t>(node_->payload);
}

double Value::as_float() const {
  if (!is(Kind::floating)) wrong_kind(Kind::floating, kind());
  return std::get<double>(node_->payload);
}

double Value::as_number() const {
  if (is(Kind::integer)) return static_cast<double>(std::get<std::int64_t>(node_->payload));
  if (is(Kind::floating)) return std::get<double>(node_->payload);
  throw Error(ErrorKind::type, "expected number, got " + std::string(kind_name(kind())));
}

const std::string& Value::as_string() const {
  if (!is(Kind::string)) wrong_kind(Kind::string, kind());
  return std::get<std::string>(node_->payload);
}

Name Value::as_name() const {
  if (!is(Kind::symbol) && !is(Kind::keyword)) wrong_kind(Kind::symbol, kind());
  return std::get<Name>(node_->payload);
}

const Vec& Value::items() const {
  if (!is_sequential()) {
    if (is_nil()) {
      static const Vec empty;
      return empty;
    }
    wrong_kind(Kind::list, kind());
  }
  return std::get<Vec>(node_->payload);
}

const MapEntries& Value::entries() const {
  if (!is(Kind::map)) {
    if (is_nil()) {
      static const MapEntries empty;
      return empty;
    }
    wrong_kind(Kind::map, kind());
  }
  return std::get<MapEntries>(node_->payload);
}

const std::shared_ptr<Closure>& Value::as_closure() const {
  if (!is(Kind::closure)) wrong_kind(Kind::closure, kind());
  return std::get<std::shared_ptr<Closure>>(node_->payload);
}

BoxCell& Value::as_box() const {
  if (!is(Kind::box)) wrong_kind(Kind::box, kind());
  return *std::get<std::shared_ptr<BoxCell>>(node_->payload);
}

const Builtin& Value::as_builtin() const {
  if (!is(Kind::builtin)) wrong_kind(Kind::builtin, kind());
  return *std::get<std::shared_ptr<const Builtin>>(node_->payload);
}

const Macro& Value::as_macro() const {
  if (!is(Kind::macro)) wrong_kind(Kind::macro, kind());
  return *std::get<std::shared_ptr<const Macro>>(node_->payload);
}

std::size_t Value::count() const {
  if (is_sequential()) return std::get<Vec>(node_->payload).size();
  if (is(Kind::map)) return std::get<MapEntries>(node_->payload).size();
  return 0;
}

const Value* Value::find(const Value& key) const {
  if (!is(Kind::map)) return nullptr;
  for (const auto& [k, v] : std::get<MapEntries>(node_->payload)) {
    if (structurally_equal(k, key)) return &v;
  }
  return nullptr;
}

const Value& Value::meta() const { return node_ ? node_->meta : nil_value(); }

Value Value::with_meta(Value meta) const {
  if (!node_) {
    if (meta.is_nil()) return *this;
    auto node = std::make_shared<Node>();
    node->meta = std::move(meta);
    return Value(std::move(node));
  }
  auto node = std::make_shared<Node>(*node_);
  node->depth = std::max(node->depth, meta.depth());
  node->meta = std::move(meta);
  return Value(std::move(node));
}

std::optional<SourceSpan> Value::span() const { return node_ ? node_->span : std::nullopt; }

Value Value::with_span(std::optional<SourceSpan> span) const {
  if (!node_ && !span) return *this;
  auto node = node_ ? std::make_shared<Node>(*node_) : std::make_shared<Node>();
  node->span = span;
  return Value(std::move(node));
}

std::uint32_t Value::depth() const { return node_ ? node_->depth : 0; }

// ---------------------------------------------------------------------------
// Equality

namespace {

enum class EqMode { strict, with_meta, runtime };

bool equal_impl(const Value& a, const Value& b, EqMode mode) {
  if (a.identity() == b.identity()) return true;
  if (mode == EqMode::with_meta && !equal_impl(a.meta(), b.meta(), mode)) return false;
  Kind ka = a.kind();
  Kind kb = b.kind();
  if (ka != kb) {
    if (mode == EqMode::runtime && a.is_sequential() && b.is_sequential()) {
      // fall through to element comparison
    } else {
      return false;
    }
  }
  switch (ka) {
    case Kind::nil: return true;
    case Kind::boolean: return a.as_bool() == b.as_bool();
    case Kind::integer: return a.as_int() == b.as_int();
    case Kind::floating: return a.as_float() == b.as_float();
    case Kind::string: return a.as_string() == b.as_string();
    case Kind::symbol:
    case Kind::keyword: return a.as_name() == b.as_name();
    case Kind::list:
    case Kind::vector: {
      const auto& xs = a.items();
      const auto& ys = b.items();
      if (xs.size() != ys.size()) return false;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!equal_impl(xs[i], ys[i], mode)) return false;
      }
      return true;
    }
    case Kind::map: {
      const auto& xs = a.entries();
      const auto& ys = b.entries();
      if (xs.size() != ys.size()) return false;
      for (const auto& [k, v] : xs) {
        auto it = std::find_if(ys.begin(), ys.end(),
                               [&](const auto& e) { return structurally_equal(e.first, k); });
        if (it == ys.end()) return false;
        if (mode == EqMode::with_meta && !equal_impl(k, it->first, mode)) return false;
        if (!equal_impl(v, it->second, mode)) return false;
      }
      return true;
    }
    case Kind::closure: return a.as_closure() == b.as_closure();
    case Kind::box: return &a.as_box() == &b.as_box();
    case Kind::builtin: return &a.as_builtin() == &b.as_builtin();
    case Kind::macro: return &a.as_macro() == &b.as_macro();
  }
  return false;
}

}  // namespace

bool structurally_equal(const Value& a, const Value& b) { return equal_impl(a, b, EqMode::strict); }
bool equal_with_meta(const Value& a, const Value& b) { return equal_impl(a, b, EqMode::with_meta); }
bool values_equal(const Value& a, const Value& b) { return equal_impl(a, b, EqMode::runtime); }

// ---------------------------------------------------------------------------

namespace {

bool find_unserializable_impl(const Value& v, Vec& path) {
  switch (v.kind()) {
    case Kind::closure:
    case Kind::box:
    case Kind::builtin:
    case Kind::macro:
      return true;
    case Kind::list:
    case Kind::vector: {
      const auto& xs = v.items();
      for (std::size_t i = 0; i < xs.size(); ++i) {
        path.push_back(Value::integer(static_cast<std::int64_t>(i)));
        if (find_unserializable_impl(xs[i], path)) return true;
        path.pop_back();
      }
      break;
    }
    case Kind::map:
      for (const auto& [k, val] : v.entries()) {
        if (find_unserializable_impl(k, path)) return true;
        path.push_back(k);
        if (find_unserializable_impl(val, path)) return true;
        path.pop_back();
      }
      break;
    default:
      break;
  }
  if (v.has_meta() && find_unserializable_impl(v.meta(), path)) return true;
  return false;
}

}  // namespace

std::optional<Vec> find_unserializable(const Value& v) {
  Vec path;
  if (find_unserializable_impl(v, path)) return path;
  return std::nullopt;
}

bool is_plain_data(const Value& v) { return !find_unserializable(v).has_value(); }

Value strip_spans(const Value& v) {
  Value out;
  switch (v.kind()) {
    case Kind::list:
    case Kind::vector: {
      Vec xs;
      xs.reserve(v.count());
      for (const auto& x : v.items()) xs.push_back(strip_spans(x));
      out = v.is(Kind::list) ? Value::list(std::move(xs)) : Value::vector(std::move(xs));
      break;
    }
    case Kind::map: {
      MapEntries es;
      es.reserve(v.count());
      for (const auto& [k, x] : v.entries()) es.emplace_back(strip_spans(k), strip_spans(x));
      out = Value::map(std::move(es));
      break;
    }
    default:
      if (!v.span()) return v;
      out = v.with_span(std::nullopt).with_meta(Value());
      break;
  }
  if (v.has_meta()) out = out.with_meta(strip_spans(v.meta()));
  return out;
}

Value assoc(const Value& map, const Value& key, const Value& val) {
  MapEntries es = map.is_nil() ? MapEntries{} : map.entries();
  bool replaced = false;
  for (auto& e : es) {
    if (structurally_equal(e.first, key)) {
      e.second = val;
      replaced = true;
      break;
    }
  }
  if (!replaced) es.emplace_back(key, val);
  return Value::map(std::move(es)).with_meta(map.meta());
}

Value dissoc(const Value& map, const Value& key) {
  if (map.is_nil()) return map;
  MapEntries es;
  for (const auto& e : map.entries()) {
    if (!structurally_equal(e.first, key)) es.push_back(e);
  }
  return Value::map(std::move(es)).with_meta(map.meta());
}

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::read: return "read";
    case ErrorKind::expand: return "expand";
    case ErrorKind::unbound: return "unbound";
    case ErrorKind::arity: return "arity";
    case ErrorKind::type: return "type";
    case ErrorKind::runtime: return "runtime";
    case ErrorKind::fuel: return "fuel";
    case ErrorKind::stopped: return "stopped";
    case ErrorKind::depth: return "depth";
    case ErrorKind::match: return "match";
    case ErrorKind::visx: return "visx";
    case ErrorKind::splice: return "splice";
    case ErrorKind::session: return "session";
    case ErrorKind::user: return "user";
  }
  return "?";
}

}  // namespace hvx
