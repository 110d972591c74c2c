#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace hvx {

/// Half-open byte range [start, end) into a source text.
struct SourceSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  bool contains(std::size_t offset) const { return start <= offset && offset < end; }
  bool encloses(const SourceSpan& other) const { return start <= other.start && other.end <= end; }
  std::size_t size() const { return end - start; }
  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

/// Interned text of a symbol or keyword. Equal names share one entry, so
/// comparison is a pointer compare. A name is qualified when it has the
/// form `ns/local` with both parts non-empty.
class Name {
 public:
  Name();
  explicit Name(std::string_view text);

  const std::string& str() const;
  std::string_view ns() const;
  std::string_view local() const;
  bool qualified() const { return !ns().empty(); }
  const void* id() const { return entry_; }

  friend bool operator==(Name a, Name b) { return a.entry_ == b.entry_; }

  struct Entry;

 private:
  const Entry* entry_;
};

enum class Kind : std::uint8_t {
  nil,
  boolean,
  integer,
  floating,
  string,
  symbol,
  keyword,
  list,
  vector,
  map,
  closure,
  box,
  builtin,
  macro,
};

std::string_view kind_name(Kind kind);

class Value;
class Interpreter;
struct Env;
struct Closure;
struct BoxCell;
struct Builtin;
struct Macro;

using Vec = std::vector<Value>;
using MapEntries = std::vector<std::pair<Value, Value>>;
using EnvPtr = std::shared_ptr<Env>;

/// Nested collections deeper than this are rejected at construction so every
/// recursive walk over data stays within a bounded native stack.
inline constexpr std::uint32_t kMaxDataDepth = 4000;

/// A Datum (reader data) or a runtime object. Data nodes are immutable and
/// freely shareable; boxes are the only mutable kind.
class Value {
 public:
  Value() = default;

  static Value boolean(bool b);
  static Value integer(std::int64_t i);
  static Value floating(double d);
  static Value string(std::string s);
  static Value symbol(Name name);
  static Value symbol(std::string_view text) { return symbol(Name(text)); }
  static Value keyword(Name name);
  static Value keyword(std::string_view text) { return keyword(Name(text)); }
  static Value list(Vec items);
  static Value vector(Vec items);
  /// Builds a map; a repeated key keeps the last value at the first position.
  static Value map(MapEntries entries);
  static Value closure(std::shared_ptr<Closure> c);
  static Value box(Value initial);
  static Value builtin(std::shared_ptr<const Builtin> b);
  static Value macro(std::shared_ptr<const Macro> m);

  Kind kind() const;
  bool is(Kind k) const { return kind() == k; }
  bool is_nil() const { return kind() == Kind::nil; }
  bool is_number() const { return is(Kind::integer) || is(Kind::floating); }
  bool is_sequential() const { return is(Kind::list) || is(Kind::vector); }
  bool is_callable() const;
  bool truthy() const;

  bool as_bool() const;
  std::int64_t as_int() const;
  double as_float() const;
  double as_number() const;
  const std::string& as_string() const;
  Name as_name() const;
  const Vec& items() const;
  const MapEntries& entries() const;
  const std::shared_ptr<Closure>& as_closure() const;
  BoxCell& as_box() const;
  const Builtin& as_builtin() const;
  const Macro& as_macro() const;

  /// Number of elements of a list, vector or map; 0 for anything else.
  std::size_t count() const;
  /// Map lookup by structural key equality; nullptr when absent.
  const Value* find(const Value& key) const;

  const Value& meta() const;
  bool has_meta() const { return !meta().is_nil(); }
  Value with_meta(Value meta) const;
  std::optional<SourceSpan> span() const;
  Value with_span(std::optional<SourceSpan> span) const;
  std::uint32_t depth() const;

  /// Node identity; two copies of one value share it.
  const void* identity() const { return node_.get(); }

 private:
  struct Node;
  explicit Value(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Value make(Kind kind, auto payload, std::uint32_t depth = 0);
  const Node& node() const;

  std::shared_ptr<const Node> node_;
};

/// Strict structural equality used for Datum invariants: kinds must match
/// (list != vector, 1 != 1.0), maps compare as unordered sets of entries,
/// metadata and spans are ignored. Runtime objects compare by identity.
bool structurally_equal(const Value& a, const Value& b);
/// As structurally_equal, but metadata must match too (recursively).
bool equal_with_meta(const Value& a, const Value& b);
/// Equality behind the language's `=`: lists and vectors with equal elements
/// are equal; otherwise as structurally_equal.
bool values_equal(const Value& a, const Value& b);

/// True for values made only of reader data (no closures, boxes, builtins or
/// macros anywhere inside, metadata included).
bool is_plain_data(const Value& v);
/// Path to the first non-data value inside `v` (map keys and vector indices),
/// or nullopt when `v` is plain data.
std::optional<Vec> find_unserializable(const Value& v);

/// Copy of `v` with every source span removed, recursively.
Value strip_spans(const Value& v);

Value assoc(const Value& map, const Value& key, const Value& val);
Value dissoc(const Value& map, const Value& key);

struct BoxCell {
  explicit BoxCell(Value v) : value(std::move(v)) {}
  Value value;
  std::uint64_t version = 0;

  void set(Value v) {
    value = std::move(v);
    ++version;
  }
};

using BuiltinFn = std::function<Value(Interpreter&, std::span<const Value>)>;

struct Builtin {
  std::string name;
  int min_args = 0;
  int max_args = -1;  // -1 = variadic
  BuiltinFn fn;
  const Interpreter* owner = nullptr;
};

}  // namespace hvx
