#include <algorithm>

#include "hvx/interp.hpp"
#include "internal.hpp"

namespace hvx {

using detail::brief;
using detail::head_is;
using detail::is_keyword;
using detail::is_symbol;
using detail::names;

std::string_view phase_name(Phase phase) {
  switch (phase) {
    case Phase::edit: return "edit";
    case Phase::compile: return "compile";
    case Phase::run: return "run";
  }
  return "?";
}

Var& Namespace::intern(Name n) {
  auto [it, inserted] = vars.try_emplace(n.id());
  if (inserted) {
    it->second.name = n;
    it->second.ns = this;
    order.push_back(n);
  }
  return it->second;
}

Interpreter::Interpreter(Phase phase, InterpreterOptions options) : phase_(phase), options_(options) {
  core_ns_ = &namespace_named(names().core);
  current_ns_ = core_ns_;
  install_core();
  current_ns_ = &namespace_named(names().user);
}

Interpreter::~Interpreter() = default;

Namespace& Interpreter::namespace_named(Name name) {
  auto& slot = namespaces_[name.id()];
  if (!slot) {
    slot = std::make_unique<Namespace>();
    slot->name = name;
  }
  return *slot;
}

Namespace* Interpreter::find_namespace(Name name) {
  auto it = namespaces_.find(name.id());
  return it == namespaces_.end() ? nullptr : it->second.get();
}

void Interpreter::set_current_namespace(Name name) { current_ns_ = &namespace_named(name); }

std::string Interpreter::take_output() {
  std::string out = std::move(output_);
  output_.clear();
  return out;
}

Fuel& Interpreter::active_fuel() {
  if (!fuel_) throw Error(ErrorKind::runtime, "no evaluation is running");
  return *fuel_;
}

Value Interpreter::gensym(std::string_view prefix) {
  return Value::symbol(std::string(prefix) + "#" + std::to_string(++gensym_counter_));
}

void Interpreter::note_symbols(const Value& form) {
  if (form.has_meta()) note_symbols(form.meta());
  switch (form.kind()) {
    case Kind::symbol: {
      const std::string& text = form.as_name().str();
      auto hash = text.rfind('#');
      if (hash == std::string::npos || hash + 1 >= text.size() || text.size() - hash > 19) return;
      std::uint64_t n = 0;
      for (std::size_t i = hash + 1; i < text.size(); ++i) {
        if (text[i] < '0' || text[i] > '9') return;
        n = n * 10 + static_cast<std::uint64_t>(text[i] - '0');
      }
      gensym_counter_ = std::max(gensym_counter_, n);
      return;
    }
    case Kind::list:
    case Kind::vector:
      for (const auto& x : form.items()) note_symbols(x);
      return;
    case Kind::map:
      for (const auto& [k, v] : form.entries()) {
        note_symbols(k);
        note_symbols(v);
      }
      return;
    default:
      return;
  }
}

std::vector<std::pair<std::string, Value>> Interpreter::enumerate_bindings() const {
  std::vector<const Namespace*> all;
  for (const auto& [id, ns] : namespaces_) all.push_back(ns.get());
  std::sort(all.begin(), all.end(), [](auto* a, auto* b) { return a->name.str() < b->name.str(); });
  std::vector<std::pair<std::string, Value>> out;
  for (const Namespace* ns : all) {
    for (Name n : ns->order) {
      const Var& var = ns->vars.at(n.id());
      if (var.bound) out.emplace_back(ns->name.str() + "/" + n.str(), var.value);
    }
  }
  return out;
}

void Interpreter::define_macro(Name name, std::shared_ptr<const Macro> macro) {
  Var& var = current_ns_->intern(name);
  var.value = Value::macro(std::move(macro));
  var.bound = true;
  var.macro = true;
  var.has_pending = false;
  var.pending = Value();
}

Value Interpreter::make_builtin(std::string name, int min_args, int max_args, BuiltinFn fn) const {
  auto b = std::make_shared<Builtin>();
  b->name = std::move(name);
  b->min_args = min_args;
  b->max_args = max_args;
  b->fn = std::move(fn);
  b->owner = this;
  return Value::builtin(std::move(b));
}

void Interpreter::define_builtin(Namespace& ns, std::string name, int min_args, int max_args, BuiltinFn fn) {
  Var& var = ns.intern(Name(name));
  var.value = make_builtin(std::move(name), min_args, max_args, std::move(fn));
  var.bound = true;
}

void Interpreter::define_native_macro(Namespace& ns, std::string name, NativeMacro fn) {
  auto m = std::make_shared<Macro>();
  m->name = ns.name.str() + "/" + name;
  m->native = std::move(fn);
  m->owner = this;
  Var& var = ns.intern(Name(name));
  var.value = Value::macro(std::move(m));
  var.bound = true;
  var.macro = true;
}

// ---------------------------------------------------------------------------

namespace {

struct NsScope {
  Namespace*& slot;
  Namespace* saved;
  NsScope(Namespace*& s, Namespace* next) : slot(s), saved(s) { slot = next; }
  ~NsScope() { slot = saved; }
};

[[noreturn]] void wrong_phase(const Interpreter& self, const Interpreter* owner, const std::string& what) {
  (void)owner;
  throw Error(ErrorKind::runtime, what + " belongs to another phase and cannot run in the " +
                                      std::string(phase_name(self.phase())) + " phase");
}

}  // namespace

Value Interpreter::var_value(Var& var, Name name, Fuel& fuel) {
  if (var.has_pending) {
    if (var.forcing) throw Error(ErrorKind::runtime, "circular definition of " + name.str());
    var.forcing = true;
    try {
      FuelScope scope(*this, fuel);
      NsScope ns(current_ns_, var.ns);
      Value v = eval_in(var.pending, nullptr);
      var.value = v;
      var.bound = true;
      var.has_pending = false;
      var.pending = Value();
      var.forcing = false;
    } catch (...) {
      var.forcing = false;
      throw;
    }
  }
  if (var.macro) throw Error(ErrorKind::expand, "cannot take the value of macro " + name.str());
  if (!var.bound) throw Error(ErrorKind::unbound, "unbound var: " + name.str());
  return var.value;
}

Value Interpreter::lookup(const Value& sym, const EnvPtr& env) {
  Name name = sym.as_name();
  if (env) {
    if (const Value* v = env->lookup(name)) return *v;
  }
  Var* var = resolve_var(name);
  if (!var) throw Error(ErrorKind::unbound, "unbound symbol: " + name.str(), sym.span());
  try {
    return var_value(*var, name, *fuel_);
  } catch (const Error& e) {
    if (!e.span() && (e.kind() == ErrorKind::unbound || e.kind() == ErrorKind::expand)) throw e.with_span(sym.span());
    throw;
  }
}

Value Interpreter::eval(const Value& form, Fuel& fuel) {
  FuelScope scope(*this, fuel);
  return eval_in(form, nullptr);
}

Value Interpreter::eval(const Value& form, const EnvPtr& env, Fuel& fuel) {
  FuelScope scope(*this, fuel);
  return eval_in(form, env);
}

Value Interpreter::apply(const Value& fn, std::span<const Value> args, Fuel& fuel) {
  FuelScope scope(*this, fuel);
  return apply_in(fn, args);
}

Value Interpreter::apply(const Value& fn, std::span<const Value> args) {
  active_fuel();
  return apply_in(fn, args);
}

Value Interpreter::eval_in(const Value& form, const EnvPtr& env) {
  fuel_->tick();
  switch (form.kind()) {
    case Kind::symbol:
      return lookup(form, env);
    case Kind::list:
      return eval_list(form, env);
    case Kind::vector: {
      DepthGuard guard(*this);
      Vec out;
      out.reserve(form.items().size());
      for (const auto& x : form.items()) out.push_back(eval_in(x, env));
      return Value::vector(std::move(out));
    }
    case Kind::map: {
      DepthGuard guard(*this);
      MapEntries out;
      out.reserve(form.entries().size());
      for (const auto& [k, v] : form.entries()) out.emplace_back(eval_in(k, env), eval_in(v, env));
      return Value::map(std::move(out));
    }
    default:
      return form;
  }
}

Value Interpreter::eval_body(const Vec& forms, std::size_t from, const EnvPtr& env) {
  Value result;
  for (std::size_t i = from; i < forms.size(); ++i) result = eval_in(forms[i], env);
  return result;
}

Value Interpreter::make_closure(const Value& form, const EnvPtr& env) {
  const Vec& items = form.items();
  auto c = std::make_shared<Closure>();
  std::size_t i = 1;
  if (i < items.size() && items[i].is(Kind::symbol)) c->name = items[i++].as_name();
  if (i >= items.size() || !items[i].is(Kind::vector)) detail::syntax_error(form, "fn expects a parameter vector");
  const Vec& params = items[i++].items();
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (is_symbol(params[p], names().amp)) {
      if (p + 2 != params.size()) detail::syntax_error(form, "& must be followed by exactly one pattern");
      c->variadic = true;
      c->rest = params[p + 1];
      break;
    }
    c->params.push_back(params[p]);
  }
  c->body.assign(items.begin() + static_cast<std::ptrdiff_t>(i), items.end());
  c->env = env;
  c->ns = current_ns_;
  c->owner = this;
  return Value::closure(std::move(c));
}

Value Interpreter::eval_list(const Value& form, const EnvPtr& env) {
  DepthGuard guard(*this);
  const Vec& items = form.items();
  if (items.empty()) return form;
  const Value& head = items[0];
  const auto& s = names();

  Value fn;
  if (head.is(Kind::symbol)) {
    Name n = head.as_name();
    const Value* local = env ? env->lookup(n) : nullptr;
    if (local) {
      fn = *local;
    } else if (n == s.if_) {
      if (items.size() < 3 || items.size() > 4) detail::syntax_error(form, "malformed if");
      if (eval_in(items[1], env).truthy()) return eval_in(items[2], env);
      return items.size() == 4 ? eval_in(items[3], env) : Value();
    } else if (n == s.let) {
      const Vec& bindings = items[1].items();
      auto frame = std::make_shared<Env>();
      frame->parent = env;
      for (std::size_t b = 0; b + 1 < bindings.size(); b += 2) {
        Value v = eval_in(bindings[b + 1], frame);
        bind_pattern(bindings[b], v, frame->bindings);
      }
      return eval_body(items, 2, frame);
    } else if (n == s.do_) {
      return eval_body(items, 1, env);
    } else if (n == s.fn) {
      return make_closure(form, env);
    } else if (n == s.quote) {
      return items[1];
    } else if (n == s.def) {
      Name local = items[1].as_name();
      if (local.qualified()) local = Name(local.local());
      Var& var = current_ns_->intern(local);
      if (items.size() >= 3) {
        Value v = eval_in(items.back(), env);
        var.value = v;
        var.bound = true;
        var.macro = false;
        var.has_pending = false;
        var.pending = Value();
      }
      return Value::symbol(current_ns_->name.str() + "/" + local.str());
    } else if (n == s.match) {
      Value scrutinee = eval_in(items[1], env);
      std::vector<std::pair<Value, Value>> clauses;
      for (std::size_t i = 2; i + 1 < items.size(); i += 2) clauses.emplace_back(items[i], items[i + 1]);
      std::vector<std::pair<Name, Value>> bound;
      for (const auto& [pattern, body] : clauses) {
        bound.clear();
        if (match_pattern(pattern, scrutinee, bound)) {
          auto frame = std::make_shared<Env>();
          frame->parent = env;
          frame->bindings = std::move(bound);
          return eval_in(body, frame);
        }
      }
      throw Error(ErrorKind::match, "no clause matches " + brief(scrutinee), form.span());
    } else if (n == s.defmacro || n == s.defvisx) {
      return Value();
    } else if (n == s.ns || n == s.declare) {
      expand_special(n, form, true);
      return Value();
    } else if (n == s.quasiquote || n == s.unquote || n == s.unquote_splicing) {
      detail::syntax_error(form, "unexpanded " + n.str());
    } else {
      fn = lookup(head, env);
    }
  } else {
    fn = eval_in(head, env);
  }

  Vec args;
  args.reserve(items.size() - 1);
  for (std::size_t i = 1; i < items.size(); ++i) args.push_back(eval_in(items[i], env));
  try {
    return apply_in(fn, args);
  } catch (const Error& e) {
    if (!e.span() && form.span()) throw e.with_span(form.span());
    throw;
  }
}

Value Interpreter::apply_in(const Value& fn, std::span<const Value> args) {
  switch (fn.kind()) {
    case Kind::closure:
      return apply_closure(fn, args);
    case Kind::builtin: {
      const Builtin& b = fn.as_builtin();
      if (b.owner != this) wrong_phase(*this, b.owner, "builtin " + b.name);
      auto n = static_cast<int>(args.size());
      if (n < b.min_args || (b.max_args >= 0 && n > b.max_args)) {
        throw Error(ErrorKind::arity, "wrong number of arguments (" + std::to_string(n) + ") passed to " + b.name);
      }
      return b.fn(*this, args);
    }
    case Kind::keyword:
    case Kind::map: {
      if (args.empty() || args.size() > 2) {
        throw Error(ErrorKind::arity, "wrong number of arguments (" + std::to_string(args.size()) + ") passed to " +
                                          brief(fn));
      }
      const Value& target = fn.is(Kind::keyword) ? args[0] : fn;
      const Value& key = fn.is(Kind::keyword) ? fn : args[0];
      if (target.is(Kind::map)) {
        if (const Value* v = target.find(key)) return *v;
      }
      return args.size() == 2 ? args[1] : Value();
    }
    case Kind::vector: {
      if (args.size() != 1 || !args[0].is(Kind::integer)) throw Error(ErrorKind::type, "vector call expects an index");
      auto i = args[0].as_int();
      if (i < 0 || static_cast<std::size_t>(i) >= fn.items().size()) {
        throw Error(ErrorKind::runtime, "index " + std::to_string(i) + " out of bounds");
      }
      return fn.items()[static_cast<std::size_t>(i)];
    }
    case Kind::macro:
      throw Error(ErrorKind::runtime, "cannot call macro " + fn.as_macro().name + " as a function");
    default:
      throw Error(ErrorKind::type, "not a function: " + brief(fn));
  }
}

Value Interpreter::apply_closure(const Value& fn, std::span<const Value> args) {
  const Closure& c = *fn.as_closure();
  auto label = [&] { return c.name ? "fn " + c.name->str() : std::string("anonymous fn"); };
  if (c.owner != this) wrong_phase(*this, c.owner, label());
  if (args.size() < c.params.size() || (!c.variadic && args.size() > c.params.size())) {
    throw Error(ErrorKind::arity, "wrong number of arguments (" + std::to_string(args.size()) + ") passed to " + label());
  }
  auto frame = std::make_shared<Env>();
  frame->parent = c.env;
  if (c.name) frame->bindings.emplace_back(*c.name, fn);
  for (std::size_t i = 0; i < c.params.size(); ++i) bind_pattern(c.params[i], args[i], frame->bindings);
  if (c.variadic) {
    Value rest;
    if (args.size() > c.params.size()) rest = Value::list(Vec(args.begin() + static_cast<std::ptrdiff_t>(c.params.size()), args.end()));
    bind_pattern(c.rest, rest, frame->bindings);
  }
  NsScope ns(current_ns_, c.ns);
  return eval_body(c.body, 0, frame);
}

// ---------------------------------------------------------------------------
// destructuring and matching

void Interpreter::bind_pattern(const Value& pattern, const Value& value, std::vector<std::pair<Name, Value>>& out) {
  const auto& s = names();
  switch (pattern.kind()) {
    case Kind::symbol:
      out.emplace_back(pattern.as_name(), value);
      return;
    case Kind::vector: {
      static const Vec empty;
      const Vec* items = &empty;
      if (value.is_sequential()) {
        items = &value.items();
      } else if (!value.is_nil()) {
        throw Error(ErrorKind::type, "cannot destructure " + std::string(kind_name(value.kind())) + " as a sequence");
      }
      const Vec& ps = pattern.items();
      std::size_t idx = 0;
      for (std::size_t i = 0; i < ps.size(); ++i) {
        if (is_symbol(ps[i], s.amp)) {
          Value rest;
          if (idx < items->size()) rest = Value::list(Vec(items->begin() + static_cast<std::ptrdiff_t>(idx), items->end()));
          bind_pattern(ps[++i], rest, out);
          idx = items->size();
        } else if (is_keyword(ps[i], s.as)) {
          bind_pattern(ps[++i], value, out);
        } else {
          bind_pattern(ps[i], idx < items->size() ? (*items)[idx] : Value(), out);
          ++idx;
        }
      }
      return;
    }
    case Kind::map: {
      if (!value.is_nil() && !value.is(Kind::map)) {
        throw Error(ErrorKind::type, "cannot destructure " + std::string(kind_name(value.kind())) + " as a map");
      }
      Value defaults;
      if (const Value* d = pattern.find(Value::keyword(s.or_))) defaults = *d;
      auto get = [&](const Value& key, const Value& binder) -> Value {
        if (value.is(Kind::map)) {
          if (const Value* v = value.find(key)) return *v;
        }
        if (defaults.is(Kind::map)) {
          if (const Value* d = defaults.find(binder)) return *d;
        }
        return Value();
      };
      for (const auto& [k, v] : pattern.entries()) {
        if (is_keyword(k, s.keys)) {
          for (const auto& binder : v.items()) bind_pattern(binder, get(Value::keyword(binder.as_name()), binder), out);
        } else if (is_keyword(k, s.as)) {
          bind_pattern(v, value, out);
        } else if (is_keyword(k, s.or_)) {
          continue;
        } else {
          bind_pattern(k, get(v, k), out);
        }
      }
      return;
    }
    default:
      throw Error(ErrorKind::expand, "invalid binding pattern: " + brief(pattern), pattern.span());
  }
}

std::vector<std::pair<Name, Value>> Interpreter::destructure(const Value& pattern, const Value& value) {
  std::vector<std::pair<Name, Value>> out;
  bind_pattern(pattern, value, out);
  return out;
}

bool Interpreter::match_pattern(const Value& pattern, const Value& value, std::vector<std::pair<Name, Value>>& out) {
  const auto& s = names();
  switch (pattern.kind()) {
    case Kind::symbol:
      if (pattern.as_name() != s.underscore) out.emplace_back(pattern.as_name(), value);
      return true;
    case Kind::vector: {
      if (!value.is_sequential() || value.items().size() != pattern.items().size()) return false;
      for (std::size_t i = 0; i < pattern.items().size(); ++i) {
        if (!match_pattern(pattern.items()[i], value.items()[i], out)) return false;
      }
      return true;
    }
    case Kind::map: {
      if (!value.is(Kind::map)) return false;
      for (const auto& [k, p] : pattern.entries()) {
        const Value* v = value.find(k);
        if (!v || !match_pattern(p, *v, out)) return false;
      }
      return true;
    }
    case Kind::list: {
      const Vec& items = pattern.items();
      if (head_is(pattern, s.quote)) return values_equal(items[1], value);
      for (std::size_t i = 1; i < items.size(); ++i) {
        std::size_t mark = out.size();
        if (match_pattern(items[i], value, out)) return true;
        out.resize(mark);
      }
      return false;
    }
    default:
      return values_equal(pattern, value);
  }
}

Value Interpreter::match_eval(const Value& scrutinee, std::span<const std::pair<Value, Value>> clauses,
                              const EnvPtr& env, Fuel& fuel) {
  FuelScope scope(*this, fuel);
  std::vector<std::pair<Name, Value>> bound;
  for (const auto& [pattern, body] : clauses) {
    bound.clear();
    if (match_pattern(pattern, scrutinee, bound)) {
      auto frame = std::make_shared<Env>();
      frame->parent = env;
      frame->bindings = std::move(bound);
      return eval_in(body, frame);
    }
  }
  throw Error(ErrorKind::match, "no clause matches " + brief(scrutinee));
}

}  // namespace hvx
