#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hvx/error.hpp"
#include "hvx/value.hpp"
#include "hvx/visx.hpp"

namespace hvx {

enum class Phase { edit, compile, run };

std::string_view phase_name(Phase phase);

/// Step budget for one evaluation. Every evaluation step consumes one unit;
/// reaching zero raises Error(ErrorKind::fuel). An optional quantum hook runs
/// every `quantum` steps, which is where a cooperative run can be paused or
/// revoked.
class Fuel {
 public:
  static constexpr std::uint64_t kUnlimited = std::numeric_limits<std::uint64_t>::max();

  explicit Fuel(std::uint64_t budget = kUnlimited) : budget_(budget), remaining_(budget) {}
  Fuel(const Fuel&) = delete;
  Fuel& operator=(const Fuel&) = delete;

  void tick() { consume(1); }

  void consume(std::uint64_t steps) {
    if (cancel_ && cancel_->load(std::memory_order_relaxed)) throw Error(ErrorKind::stopped, "run stopped");
    // written by the evaluating thread only; relaxed so other threads may poll it
    used_.store(used_.load(std::memory_order_relaxed) + steps, std::memory_order_relaxed);
    if (remaining_ != kUnlimited) {
      if (steps > remaining_) {
        remaining_ = 0;
        throw Error(ErrorKind::fuel, "fuel exhausted after " + std::to_string(budget_) + " steps");
      }
      remaining_ -= steps;
    }
    if (quantum_ != 0) {
      quantum_used_ += steps;
      while (quantum_used_ >= quantum_) {
        quantum_used_ -= quantum_;
        on_quantum_();
      }
    }
  }

  void set_quantum(std::uint64_t steps, std::function<void()> hook) {
    quantum_ = steps;
    quantum_used_ = 0;
    on_quantum_ = std::move(hook);
  }

  /// Once `*flag` is set, the next consume throws Error(stopped) before
  /// charging anything.
  void set_cancel(const std::atomic<bool>* flag) { cancel_ = flag; }

  std::uint64_t budget() const { return budget_; }
  std::uint64_t remaining() const { return remaining_; }
  std::uint64_t used() const { return used_.load(std::memory_order_relaxed); }
  bool unlimited() const { return budget_ == kUnlimited; }

 private:
  std::uint64_t budget_;
  std::uint64_t remaining_;
  std::atomic<std::uint64_t> used_{0};
  std::uint64_t quantum_ = 0;
  std::uint64_t quantum_used_ = 0;
  std::function<void()> on_quantum_;
  const std::atomic<bool>* cancel_ = nullptr;
};

/// One lexical frame. Global names live in namespaces, not in frames.
struct Env {
  std::vector<std::pair<Name, Value>> bindings;
  EnvPtr parent;

  const Value* lookup(Name name) const {
    for (const Env* e = this; e; e = e->parent.get()) {
      for (auto it = e->bindings.rbegin(); it != e->bindings.rend(); ++it) {
        if (it->first == name) return &it->second;
      }
    }
    return nullptr;
  }
};

struct Namespace;

struct Closure {
  std::optional<Name> name;
  Vec params;            // binding patterns before `&`
  Value rest;            // pattern after `&`, nil when not variadic
  bool variadic = false;
  Vec body;
  EnvPtr env;
  Namespace* ns = nullptr;
  const Interpreter* owner = nullptr;
};

using NativeMacro = std::function<Value(Interpreter&, const Value& form)>;

struct Macro {
  std::string name;
  Value expander;      // closure taking the unevaluated argument forms
  NativeMacro native;  // used instead of `expander` when set
  std::shared_ptr<const VisxDef> visx;  // set for the macro a defvisx installs
  const Interpreter* owner = nullptr;
};

struct Var {
  Name name;
  Namespace* ns = nullptr;
  Value value;
  bool bound = false;
  bool macro = false;
  // Top-level definitions in edit and compile worlds are evaluated on first
  // use; `pending` holds the expanded init form until then.
  Value pending;
  bool has_pending = false;
  bool forcing = false;
};

struct Namespace {
  Name name;
  std::unordered_map<const void*, Var> vars;
  std::unordered_map<const void*, Namespace*> aliases;
  std::vector<Name> order;  // definition order, for enumeration

  Var* find(Name n) {
    auto it = vars.find(n.id());
    return it == vars.end() ? nullptr : &it->second;
  }
  Var& intern(Name n);
};

struct InterpreterOptions {
  std::uint64_t expand_fuel = 1'000'000;  // per top-level form
  std::uint32_t max_eval_depth = 2500;
};

/// Result of expanding one top-level source form during load().
struct LoadedForm {
  Value source;
  Value expanded;
  std::optional<Error> error;
};

/// One evaluation world. Each phase (edit, compile, run) gets its own
/// instance; closures remember their owner and refuse to run anywhere else,
/// so no binding crosses phases except as plain data.
class Interpreter {
 public:
  explicit Interpreter(Phase phase, InterpreterOptions options = {});
  ~Interpreter();
  Interpreter(const Interpreter&) = delete;
  Interpreter& operator=(const Interpreter&) = delete;

  Phase phase() const { return phase_; }
  const InterpreterOptions& options() const { return options_; }

  Namespace& current_namespace() { return *current_ns_; }
  void set_current_namespace(Name name);
  Namespace& namespace_named(Name name);
  Namespace* find_namespace(Name name);

  /// Fully expands a top-level form under a fresh expansion budget.
  Value expand(const Value& form);
  Value expand(const Value& form, Fuel& fuel);
  /// Expands and registers each top-level form in order. With stop_on_error
  /// the first failing form ends the load (its error is recorded); otherwise
  /// failures are recorded per form and loading continues.
  std::vector<LoadedForm> load(std::span<const Value> forms, bool stop_on_error);

  /// Evaluates an expanded form in the global environment of the current
  /// namespace, or in a lexical environment.
  Value eval(const Value& form, Fuel& fuel);
  Value eval(const Value& form, const EnvPtr& env, Fuel& fuel);
  Value apply(const Value& fn, std::span<const Value> args, Fuel& fuel);
  /// Calls `fn` under the budget of the evaluation currently running.
  Value apply(const Value& fn, std::span<const Value> args);

  /// Fresh symbol `prefix#N`, distinct from every symbol this interpreter has
  /// produced or loaded.
  Value gensym(std::string_view prefix);
  /// Advances the gensym counter past any `name#N` symbol inside `form`.
  void note_symbols(const Value& form);

  /// Binds a `let`/`fn` pattern against a value.
  std::vector<std::pair<Name, Value>> destructure(const Value& pattern, const Value& value);
  /// Evaluates a `match` over already-validated clauses.
  Value match_eval(const Value& scrutinee, std::span<const std::pair<Value, Value>> clauses,
                   const EnvPtr& env, Fuel& fuel);
  /// Binders of a match pattern; throws Error(expand) for a non-linear pattern
  /// or `:or` alternatives with different binder sets.
  std::vector<Name> pattern_binders(const Value& pattern);

  Registry& registry() { return registry_; }
  const Registry& registry() const { return registry_; }

  std::string& output() { return output_; }
  std::string take_output();

  /// Every bound global as (qualified name, value), for phase-isolation audits.
  std::vector<std::pair<std::string, Value>> enumerate_bindings() const;

  Fuel& active_fuel();
  /// Charges extra steps for builtins whose work grows with data size.
  void charge(std::uint64_t steps) { active_fuel().consume(steps); }

  // Used by builtins and by define_visx.
  Var* resolve_var(Name name);
  Value var_value(Var& var, Name name, Fuel& fuel);
  Value expand_detached(const Value& form, Fuel& fuel);
  void define_macro(Name name, std::shared_ptr<const Macro> macro);
  Value make_builtin(std::string name, int min_args, int max_args, BuiltinFn fn) const;
  void define_builtin(Namespace& ns, std::string name, int min_args, int max_args, BuiltinFn fn);
  void define_native_macro(Namespace& ns, std::string name, NativeMacro fn);
  /// The macro `head` names in the current scope, or nil.
  Value macro_for(const Value& head);
  /// One expansion step of a macro call (the output is not expanded further).
  Value invoke_macro(const Value& macro, const Value& form);

 private:
  friend class FuelScope;
  friend struct DepthGuard;

  // expansion
  Value expand_form(const Value& form, bool top_level);
  Value expand_list(const Value& form, bool top_level);
  Value expand_special(Name head, const Value& form, bool top_level);
  Value expand_macro_call(const Macro& macro, const Value& form, bool top_level);
  Value expand_pattern(const Value& pattern);
  Value quasi(const Value& form, int depth, std::unordered_map<const void*, Value>& autos);
  void check_reference(const Value& sym);
  bool is_local(Name name) const;
  void push_binders(const Value& pattern, std::size_t& pushed);
  void collect_binders(const Value& pattern, std::vector<Name>& out);

  // evaluation
  Value eval_in(const Value& form, const EnvPtr& env);
  Value eval_list(const Value& form, const EnvPtr& env);
  Value eval_body(const Vec& forms, std::size_t from, const EnvPtr& env);
  Value make_closure(const Value& form, const EnvPtr& env);
  Value apply_in(const Value& fn, std::span<const Value> args);
  Value apply_closure(const Value& fn, std::span<const Value> args);
  Value lookup(const Value& sym, const EnvPtr& env);
  void bind_pattern(const Value& pattern, const Value& value, std::vector<std::pair<Name, Value>>& out);
  bool match_pattern(const Value& pattern, const Value& value, std::vector<std::pair<Name, Value>>& out);

  void install_core();

  Phase phase_;
  InterpreterOptions options_;
  std::unordered_map<const void*, std::unique_ptr<Namespace>> namespaces_;
  Namespace* current_ns_ = nullptr;
  Namespace* core_ns_ = nullptr;
  Registry registry_;
  std::string output_;
  std::uint64_t gensym_counter_ = 0;
  std::vector<Name> locals_;
  Fuel* fuel_ = nullptr;
  std::uint32_t depth_ = 0;
};

/// Installs `fuel` as the active budget of `interp` for the scope's lifetime.
class FuelScope {
 public:
  FuelScope(Interpreter& interp, Fuel& fuel) : interp_(interp), saved_(interp.fuel_) { interp.fuel_ = &fuel; }
  ~FuelScope() { interp_.fuel_ = saved_; }
  FuelScope(const FuelScope&) = delete;
  FuelScope& operator=(const FuelScope&) = delete;

 private:
  Interpreter& interp_;
  Fuel* saved_;
};

}  // namespace hvx
