#include <algorithm>
#include <unordered_set>

#include "hvx/interp.hpp"
#include "internal.hpp"

namespace hvx {

using detail::brief;
using detail::head_is;
using detail::is_keyword;
using detail::is_symbol;
using detail::names;
using detail::rebuild;
using detail::syntax_error;

namespace {

bool is_special(Name n) {
  const auto& s = names();
  return n == s.def || n == s.fn || n == s.let || n == s.if_ || n == s.do_ || n == s.quote || n == s.quasiquote ||
         n == s.unquote || n == s.unquote_splicing || n == s.defmacro || n == s.defvisx || n == s.match ||
         n == s.ns || n == s.declare;
}

Value call(Name fn, Vec args, std::optional<SourceSpan> span) {
  args.insert(args.begin(), Value::symbol(fn));
  return Value::list(std::move(args)).with_span(span);
}

// Errors raised while expanding a macro call point at the call when they
// carry no location. For a VIsx instance they always point inside the
// instance: anything generated by elaborate is reported at the instance.
[[noreturn]] void rethrow_at(const Macro& macro, const Value& form, const Error& e) {
  auto span = form.span();
  if (!span) throw e;
  if (!e.span()) throw e.with_span(span);
  if (macro.visx && !span->encloses(*e.span())) throw e.with_span(span);
  throw e;
}

// Restores the lexical scope on exit.
struct LocalsMark {
  std::vector<Name>& locals;
  std::size_t size;
  explicit LocalsMark(std::vector<Name>& l) : locals(l), size(l.size()) {}
  ~LocalsMark() { locals.resize(size); }
};

// Clears the lexical scope for forms evaluated at expansion time.
struct DetachedScope {
  std::vector<Name>& locals;
  std::vector<Name> saved;
  explicit DetachedScope(std::vector<Name>& l) : locals(l), saved(std::move(l)) { locals.clear(); }
  ~DetachedScope() { locals = std::move(saved); }
};

}  // namespace

Value Interpreter::expand(const Value& form) {
  Fuel fuel(options_.expand_fuel);
  return expand(form, fuel);
}

Value Interpreter::expand(const Value& form, Fuel& fuel) {
  FuelScope scope(*this, fuel);
  DetachedScope detached(locals_);
  return expand_form(form, true);
}

Value Interpreter::expand_detached(const Value& form, Fuel& fuel) {
  FuelScope scope(*this, fuel);
  DetachedScope detached(locals_);
  return expand_form(form, false);
}

std::vector<LoadedForm> Interpreter::load(std::span<const Value> forms, bool stop_on_error) {
  std::vector<LoadedForm> out;
  for (const auto& form : forms) note_symbols(form);
  for (const auto& form : forms) {
    LoadedForm lf{form, Value(), std::nullopt};
    try {
      lf.expanded = expand(form);
    } catch (const Error& e) {
      lf.error = e.span() ? e : e.with_span(form.span());
    }
    bool failed = lf.error.has_value();
    out.push_back(std::move(lf));
    if (failed && stop_on_error) break;
  }
  return out;
}

bool Interpreter::is_local(Name name) const {
  return std::find(locals_.rbegin(), locals_.rend(), name) != locals_.rend();
}

Var* Interpreter::resolve_var(Name name) {
  if (name.qualified()) {
    Name ns_name(name.ns());
    Namespace* ns = nullptr;
    if (auto it = current_ns_->aliases.find(ns_name.id()); it != current_ns_->aliases.end()) {
      ns = it->second;
    } else {
      ns = find_namespace(ns_name);
    }
    return ns ? ns->find(Name(name.local())) : nullptr;
  }
  if (Var* v = current_ns_->find(name)) return v;
  return core_ns_->find(name);
}

Value Interpreter::macro_for(const Value& head) {
  if (!head.is(Kind::symbol)) return Value();
  Name n = head.as_name();
  if (is_local(n)) return Value();
  Var* v = resolve_var(n);
  if (!v || !v->macro) return Value();
  return v->value;
}

void Interpreter::check_reference(const Value& sym) {
  Name n = sym.as_name();
  if (is_local(n)) return;
  if (is_special(n)) throw Error(ErrorKind::expand, "cannot take the value of special form " + n.str(), sym.span());
  Var* v = resolve_var(n);
  if (!v) throw Error(ErrorKind::unbound, "unbound symbol: " + n.str(), sym.span());
  if (v->macro) throw Error(ErrorKind::expand, "cannot take the value of macro " + n.str(), sym.span());
}

Value Interpreter::expand_form(const Value& form, bool top_level) {
  fuel_->tick();
  DepthGuard guard(*this);
  switch (form.kind()) {
    case Kind::symbol:
      check_reference(form);
      return form;
    case Kind::list:
      return expand_list(form, top_level);
    case Kind::vector: {
      Vec out;
      out.reserve(form.items().size());
      for (const auto& x : form.items()) out.push_back(expand_form(x, false));
      return rebuild(form, std::move(out));
    }
    case Kind::map: {
      MapEntries out;
      out.reserve(form.entries().size());
      for (const auto& [k, v] : form.entries()) out.emplace_back(expand_form(k, false), expand_form(v, false));
      Value m = Value::map(std::move(out));
      if (form.has_meta()) m = m.with_meta(form.meta());
      return m.with_span(form.span());
    }
    default:
      return form;
  }
}

Value Interpreter::expand_list(const Value& form, bool top_level) {
  const Vec& items = form.items();
  if (items.empty()) return form;
  const Value& head = items[0];
  if (head.is(Kind::symbol) && !is_local(head.as_name())) {
    Name n = head.as_name();
    if (is_special(n)) return expand_special(n, form, top_level);
    Value macro = macro_for(head);
    if (!macro.is_nil()) {
      try {
        return expand_form(invoke_macro(macro, form), top_level);
      } catch (const Error& e) {
        rethrow_at(macro.as_macro(), form, e);
      }
    }
  }
  Vec out;
  out.reserve(items.size());
  // an unresolved operator is left for run time
  out.push_back(head.is(Kind::symbol) ? head : expand_form(head, false));
  for (std::size_t i = 1; i < items.size(); ++i) out.push_back(expand_form(items[i], false));
  return rebuild(form, std::move(out));
}

Value Interpreter::invoke_macro(const Value& macro, const Value& form) {
  const Macro& m = macro.as_macro();
  if (m.native) return m.native(*this, form);
  Vec args(form.items().begin() + 1, form.items().end());
  return apply_in(m.expander, args);
}

void Interpreter::push_binders(const Value& pattern, std::size_t& pushed) {
  const auto& s = names();
  switch (pattern.kind()) {
    case Kind::symbol: {
      Name n = pattern.as_name();
      if (n.qualified() || n == s.amp) syntax_error(pattern, "invalid binder");
      locals_.push_back(n);
      ++pushed;
      return;
    }
    case Kind::vector: {
      const Vec& items = pattern.items();
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (is_symbol(items[i], s.amp) || is_keyword(items[i], s.as)) {
          if (i + 1 >= items.size()) syntax_error(pattern, "missing pattern after " + brief(items[i]));
          if (is_keyword(items[i], s.as) && !items[i + 1].is(Kind::symbol)) {
            syntax_error(pattern, ":as expects a symbol");
          }
          push_binders(items[++i], pushed);
          continue;
        }
        push_binders(items[i], pushed);
      }
      return;
    }
    case Kind::map:
      for (const auto& [k, v] : pattern.entries()) {
        if (is_keyword(k, s.keys)) {
          if (!v.is(Kind::vector)) syntax_error(pattern, ":keys expects a vector of symbols");
          for (const auto& x : v.items()) {
            if (!x.is(Kind::symbol)) syntax_error(pattern, ":keys expects a vector of symbols");
            push_binders(x, pushed);
          }
        } else if (is_keyword(k, s.as)) {
          if (!v.is(Kind::symbol)) syntax_error(pattern, ":as expects a symbol");
          push_binders(v, pushed);
        } else if (is_keyword(k, s.or_)) {
          if (!v.is(Kind::map)) syntax_error(pattern, ":or expects a map");
        } else {
          push_binders(k, pushed);
        }
      }
      return;
    default:
      syntax_error(pattern, "invalid binding pattern");
  }
}

// ---------------------------------------------------------------------------
// match patterns

void Interpreter::collect_binders(const Value& pattern, std::vector<Name>& out) {
  const auto& s = names();
  switch (pattern.kind()) {
    case Kind::symbol: {
      Name n = pattern.as_name();
      if (n == s.underscore) return;
      if (n.qualified() || n == s.amp) syntax_error(pattern, "invalid pattern binder");
      out.push_back(n);
      return;
    }
    case Kind::vector:
      for (const auto& x : pattern.items()) collect_binders(x, out);
      return;
    case Kind::map:
      for (const auto& [k, v] : pattern.entries()) collect_binders(v, out);
      return;
    case Kind::list: {
      if (head_is(pattern, s.quote)) return;
      const Vec& items = pattern.items();
      if (items.empty() || !is_keyword(items[0], s.or_)) syntax_error(pattern, "invalid pattern");
      if (items.size() < 2) syntax_error(pattern, "(:or ...) needs at least one alternative");
      std::vector<Name> first;
      for (std::size_t i = 1; i < items.size(); ++i) {
        std::vector<Name> alt;
        collect_binders(items[i], alt);
        std::vector<const void*> ids;
        for (Name n : alt) ids.push_back(n.id());
        std::sort(ids.begin(), ids.end());
        if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
          syntax_error(items[i], "non-linear pattern: a binder appears twice");
        }
        if (i == 1) {
          first = alt;
          continue;
        }
        std::vector<const void*> first_ids;
        for (Name n : first) first_ids.push_back(n.id());
        std::sort(first_ids.begin(), first_ids.end());
        if (ids != first_ids) syntax_error(pattern, ":or alternatives bind different variables");
      }
      out.insert(out.end(), first.begin(), first.end());
      return;
    }
    default:
      return;
  }
}

std::vector<Name> Interpreter::pattern_binders(const Value& pattern) {
  std::vector<Name> out;
  collect_binders(pattern, out);
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t j = i + 1; j < out.size(); ++j) {
      if (out[i] == out[j]) syntax_error(pattern, "non-linear pattern: binder " + out[i].str() + " appears twice");
    }
  }
  return out;
}

Value Interpreter::expand_pattern(const Value& pattern) {
  fuel_->tick();
  DepthGuard guard(*this);
  const auto& s = names();
  switch (pattern.kind()) {
    case Kind::list: {
      const Vec& items = pattern.items();
      if (items.empty()) syntax_error(pattern, "invalid pattern");
      if (head_is(pattern, s.quote)) return pattern;
      if (is_keyword(items[0], s.or_)) {
        Vec out{items[0]};
        for (std::size_t i = 1; i < items.size(); ++i) out.push_back(expand_pattern(items[i]));
        return rebuild(pattern, std::move(out));
      }
      Value macro = macro_for(items[0]);
      if (macro.is_nil()) syntax_error(pattern, "invalid pattern");
      try {
        return expand_pattern(invoke_macro(macro, pattern));
      } catch (const Error& e) {
        rethrow_at(macro.as_macro(), pattern, e);
      }
    }
    case Kind::vector: {
      Vec out;
      for (const auto& x : pattern.items()) out.push_back(expand_pattern(x));
      return rebuild(pattern, std::move(out));
    }
    case Kind::map: {
      MapEntries out;
      for (const auto& [k, v] : pattern.entries()) out.emplace_back(k, expand_pattern(v));
      return Value::map(std::move(out)).with_span(pattern.span());
    }
    default:
      return pattern;
  }
}

// ---------------------------------------------------------------------------
// quasiquote

Value Interpreter::quasi(const Value& form, int depth, std::unordered_map<const void*, Value>& autos) {
  fuel_->tick();
  DepthGuard guard(*this);
  const auto& s = names();
  auto span = form.span();
  auto quoted = [&](const Value& v) { return Value::list({Value::symbol(s.quote), v}).with_span(span); };
  auto parts = [&](const Vec& items) {
    Vec out;
    for (const auto& x : items) {
      if (depth == 1 && head_is(x, s.unquote_splicing)) {
        if (x.items().size() != 2) syntax_error(x, "unquote-splicing expects one form");
        out.push_back(x.items()[1]);
      } else {
        out.push_back(call(s.list, {quasi(x, depth, autos)}, x.span()));
      }
    }
    return out;
  };

  Value built;
  switch (form.kind()) {
    case Kind::symbol: {
      Name n = form.as_name();
      const std::string& text = n.str();
      if (!n.qualified() && text.size() > 1 && text.back() == '#') {
        auto it = autos.find(n.id());
        if (it == autos.end()) {
          it = autos.emplace(n.id(), gensym(std::string_view(text).substr(0, text.size() - 1))).first;
        }
        built = quoted(it->second);
      } else if (!n.qualified() && !is_special(n) && n != s.amp && current_ns_ != core_ns_ && current_ns_->find(n)) {
        built = quoted(Value::symbol(current_ns_->name.str() + "/" + text));
      } else {
        built = quoted(form.with_meta(Value()));
      }
      break;
    }
    case Kind::list: {
      const Vec& items = form.items();
      if (items.empty()) {
        built = quoted(form.with_meta(Value()));
        break;
      }
      if (head_is(form, s.unquote) || head_is(form, s.unquote_splicing)) {
        if (items.size() != 2) syntax_error(form, "unquote expects one form");
        if (depth == 1) {
          if (head_is(form, s.unquote_splicing)) syntax_error(form, "unquote-splicing outside a list");
          return items[1];
        }
        built = call(s.qq_list,
                     {call(s.list, {quoted(items[0])}, span), call(s.list, {quasi(items[1], depth - 1, autos)}, span)},
                     span);
        break;
      }
      if (head_is(form, s.quasiquote)) {
        if (items.size() != 2) syntax_error(form, "quasiquote expects one form");
        built = call(s.qq_list,
                     {call(s.list, {quoted(items[0])}, span), call(s.list, {quasi(items[1], depth + 1, autos)}, span)},
                     span);
        break;
      }
      built = call(s.qq_list, parts(items), span);
      break;
    }
    case Kind::vector:
      built = call(s.qq_vector, parts(form.items()), span);
      break;
    case Kind::map: {
      Vec args;
      for (const auto& [k, v] : form.entries()) {
        args.push_back(call(s.list, {quasi(k, depth, autos)}, k.span()));
        args.push_back(call(s.list, {quasi(v, depth, autos)}, v.span()));
      }
      built = call(s.qq_map, std::move(args), span);
      break;
    }
    default:
      return form;
  }
  if (form.has_meta()) built = call(s.with_meta, {built, quasi(form.meta(), depth, autos)}, span);
  return built;
}

// ---------------------------------------------------------------------------
// special forms

Value Interpreter::expand_special(Name head, const Value& form, bool top_level) {
  const auto& s = names();
  const Vec& items = form.items();
  auto arity = [&](std::size_t lo, std::size_t hi, const char* what) {
    if (items.size() < lo || items.size() > hi) syntax_error(form, what);
  };

  if (head == s.quote) {
    arity(2, 2, "quote expects one form");
    return form;
  }
  if (head == s.quasiquote) {
    arity(2, 2, "quasiquote expects one form");
    std::unordered_map<const void*, Value> autos;
    return expand_form(quasi(items[1], 1, autos), false);
  }
  if (head == s.unquote || head == s.unquote_splicing) syntax_error(form, head.str() + " outside quasiquote");

  if (head == s.if_) {
    arity(3, 4, "if expects a test, a then branch and an optional else branch");
    Vec out{items[0]};
    for (std::size_t i = 1; i < items.size(); ++i) out.push_back(expand_form(items[i], false));
    return rebuild(form, std::move(out));
  }
  if (head == s.do_) {
    Vec out{items[0]};
    for (std::size_t i = 1; i < items.size(); ++i) out.push_back(expand_form(items[i], top_level));
    return rebuild(form, std::move(out));
  }
  if (head == s.def) {
    arity(2, 4, "def expects a name and an optional value");
    const Value& name = items[1];
    if (!name.is(Kind::symbol)) syntax_error(form, "def expects a symbol");
    Name n = name.as_name();
    if (n.qualified()) {
      if (n.ns() != current_ns_->name.str()) syntax_error(form, "cannot def a name in another namespace");
      n = Name(n.local());
    }
    if (items.size() == 4 && !items[2].is(Kind::string)) syntax_error(form, "def docstring must be a string");
    Var& var = current_ns_->intern(n);
    Vec out{items[0], Value::symbol(n).with_span(name.span())};
    if (items.size() >= 3) {
      Value init = expand_form(items.back(), false);
      out.push_back(init);
      if (top_level && phase_ != Phase::run) {
        var.pending = init;
        var.has_pending = true;
        var.bound = false;
        var.macro = false;
        var.value = Value();
      }
    }
    return rebuild(form, std::move(out));
  }
  if (head == s.fn) {
    std::size_t i = 1;
    Vec out{items[0]};
    LocalsMark mark(locals_);
    std::size_t pushed = 0;
    if (i < items.size() && items[i].is(Kind::symbol)) {
      push_binders(items[i], pushed);
      out.push_back(items[i++]);
    }
    if (i >= items.size() || !items[i].is(Kind::vector)) syntax_error(form, "fn expects a parameter vector");
    const Vec& params = items[i].items();
    for (std::size_t p = 0; p < params.size(); ++p) {
      if (is_symbol(params[p], s.amp)) {
        if (p + 2 != params.size()) syntax_error(items[i], "& must be followed by exactly one pattern");
        push_binders(params[p + 1], pushed);
        break;
      }
      push_binders(params[p], pushed);
    }
    out.push_back(items[i++]);
    for (; i < items.size(); ++i) out.push_back(expand_form(items[i], false));
    return rebuild(form, std::move(out));
  }
  if (head == s.let) {
    if (items.size() < 2 || !items[1].is(Kind::vector)) syntax_error(form, "let expects a binding vector");
    const Vec& bindings = items[1].items();
    if (bindings.size() % 2 != 0) syntax_error(items[1], "let bindings need an even number of forms");
    LocalsMark mark(locals_);
    std::size_t pushed = 0;
    Vec expanded;
    for (std::size_t b = 0; b < bindings.size(); b += 2) {
      Value init = expand_form(bindings[b + 1], false);
      push_binders(bindings[b], pushed);
      expanded.push_back(bindings[b]);
      expanded.push_back(init);
    }
    Vec out{items[0], rebuild(items[1], std::move(expanded))};
    for (std::size_t i = 2; i < items.size(); ++i) out.push_back(expand_form(items[i], false));
    return rebuild(form, std::move(out));
  }
  if (head == s.defmacro) {
    if (items.size() < 3 || !items[1].is(Kind::symbol) || items[1].as_name().qualified()) {
      syntax_error(form, "defmacro expects a name and a parameter vector");
    }
    std::size_t params_at = items[2].is(Kind::string) ? 3 : 2;
    if (params_at >= items.size() || !items[params_at].is(Kind::vector)) {
      syntax_error(form, "defmacro expects a parameter vector");
    }
    Vec fn_items{Value::symbol(s.fn), items[1], items[params_at]};
    for (std::size_t i = params_at + 1; i < items.size(); ++i) fn_items.push_back(items[i]);
    Value fn_form = Value::list(std::move(fn_items)).with_span(form.span());
    Value expanded;
    {
      DetachedScope detached(locals_);
      expanded = expand_form(fn_form, false);
    }
    Value closure = eval_in(expanded, nullptr);
    auto macro = std::make_shared<Macro>();
    macro->name = current_ns_->name.str() + "/" + items[1].as_name().str();
    macro->expander = closure;
    macro->owner = this;
    define_macro(items[1].as_name(), std::move(macro));
    Vec out{items[0]};
    for (std::size_t i = 1; i < expanded.items().size(); ++i) out.push_back(expanded.items()[i]);
    return rebuild(form, std::move(out));
  }
  if (head == s.defvisx) {
    DetachedScope detached(locals_);
    return define_visx(*this, form, *fuel_);
  }
  if (head == s.match) {
    if (items.size() < 2 || (items.size() - 2) % 2 != 0) {
      syntax_error(form, "match expects a value and pattern/body pairs");
    }
    Vec out{items[0], expand_form(items[1], false)};
    for (std::size_t i = 2; i < items.size(); i += 2) {
      Value pattern = expand_pattern(items[i]);
      LocalsMark mark(locals_);
      for (Name n : pattern_binders(pattern)) locals_.push_back(n);
      out.push_back(pattern);
      out.push_back(expand_form(items[i + 1], false));
    }
    return rebuild(form, std::move(out));
  }
  if (head == s.ns) {
    if (items.size() < 2 || !items[1].is(Kind::symbol) || items[1].as_name().qualified()) {
      syntax_error(form, "ns expects an unqualified name");
    }
    set_current_namespace(items[1].as_name());
    for (std::size_t i = 2; i < items.size(); ++i) {
      const Value& clause = items[i];
      if (!clause.is(Kind::list) || clause.items().empty() || !is_keyword(clause.items()[0], s.require)) {
        syntax_error(clause, "unsupported ns clause");
      }
      for (std::size_t r = 1; r < clause.items().size(); ++r) {
        const Value& spec = clause.items()[r];
        if (spec.is(Kind::symbol)) continue;
        if (!spec.is(Kind::vector) || spec.items().size() != 3 || !spec.items()[0].is(Kind::symbol) ||
            !is_keyword(spec.items()[1], s.as) || !spec.items()[2].is(Kind::symbol)) {
          syntax_error(spec, "require expects [ns :as alias]");
        }
        Namespace& target = namespace_named(spec.items()[0].as_name());
        current_ns_->aliases[spec.items()[2].as_name().id()] = &target;
      }
    }
    return form;
  }
  if (head == s.declare) {
    for (std::size_t i = 1; i < items.size(); ++i) {
      if (!items[i].is(Kind::symbol) || items[i].as_name().qualified()) syntax_error(form, "declare expects symbols");
      current_ns_->intern(items[i].as_name());
    }
    return form;
  }
  syntax_error(form, "unknown special form");
}

}  // namespace hvx
