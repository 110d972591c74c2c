#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hvx/value.hpp"

namespace hvx {

class Document;
class Fuel;

/// A registered visual-syntax definition.
struct VisxDef {
  Name name;        // qualified, `ns/Short`
  Name short_name;
  Name ns;
  std::vector<std::pair<Value, Value>> schema;  // keyword -> default, in declaration order
  Value render;     // one-parameter closure over the state box; edit phase only
  Value elaborate;  // one-parameter closure over the state value
  std::optional<SourceSpan> span;

  Value defaults() const;
  /// `state` with every missing schema key appended at its default.
  Value with_defaults(const Value& state) const;
};

class Registry {
 public:
  void define(std::shared_ptr<const VisxDef> def);
  std::shared_ptr<const VisxDef> find(Name qualified) const;
  /// Resolves a name as written in a document: qualified names directly,
  /// short names in `current_ns` and then in `user`.
  std::shared_ptr<const VisxDef> resolve(Name written, std::string_view current_ns) const;
  const std::vector<std::shared_ptr<const VisxDef>>& all() const { return defs_; }

 private:
  std::vector<std::shared_ptr<const VisxDef>> defs_;
};

/// The name a document uses for `def`: short for the default `user`
/// namespace, qualified otherwise.
std::string written_name(const VisxDef& def);

/// Where a nested instance lives: inside string field `path` of the state of
/// instance `host_id`, at `span` within that string.
struct InstanceHost {
  std::string host_id;
  Vec path;
};

struct VisxInstance {
  std::string id;  // stable identity: def name + ordinal, prefixed by host for nested ones
  Name def_name;   // as written in the tag
  std::shared_ptr<const VisxDef> def;  // null when unresolved
  Value form;
  Value state;                 // literal state as written ({} when absent)
  Value state_with_defaults;
  SourceSpan span;             // whole tagged form (document, or host string when nested)
  std::optional<SourceSpan> state_span;
  std::optional<InstanceHost> host;
  std::vector<std::string> diagnostics;

  bool resolved() const { return def != nullptr; }
};

/// Finds every `^{:visx Name}` (or `^:visx`) tagged form, including forms
/// inside code strings held in other instances' state, in document order
/// with outer instances before the ones nested in them.
std::vector<VisxInstance> scan(const Document& doc, const Registry& registry);

/// Canonical text of a state map. Throws Error(visx) naming the first key
/// holding a closure, box or other runtime object.
std::string serialize_state(const Value& state);

class Interpreter;

/// Runs the definition's elaborate function on the instance state (with
/// defaults). The result is returned unexpanded; errors carry the instance
/// span.
Value elaborate_instance(Interpreter& interp, const VisxInstance& inst, Fuel& fuel);

/// Canonical text for a fresh instance: `^{:visx Name} (Name {defaults})`.
std::string instantiate_default(Name name, const Registry& registry);

/// Handles a `(defvisx Name (state ...) (render f) (elaborate g))` form during
/// expansion: registers the definition and its macro, returns the expanded form.
Value define_visx(Interpreter& interp, const Value& form, Fuel& fuel);

}  // namespace hvx
