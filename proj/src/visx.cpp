#include "hvx/visx.hpp"

#include <map>

#include "hvx/interp.hpp"
#include "hvx/reader.hpp"
#include "internal.hpp"

namespace hvx {

using detail::brief;
using detail::head_is;
using detail::is_keyword;
using detail::is_symbol;
using detail::names;

Value VisxDef::defaults() const { return Value::map(schema); }

Value VisxDef::with_defaults(const Value& state) const {
  MapEntries out = state.is(Kind::map) ? state.entries() : MapEntries{};
  for (const auto& [k, v] : schema) {
    if (!state.is(Kind::map) || !state.find(k)) out.emplace_back(k, v);
  }
  return Value::map(std::move(out));
}

void Registry::define(std::shared_ptr<const VisxDef> def) {
  for (auto& d : defs_) {
    if (d->name == def->name) {
      d = std::move(def);
      return;
    }
  }
  defs_.push_back(std::move(def));
}

std::shared_ptr<const VisxDef> Registry::find(Name qualified) const {
  for (const auto& d : defs_) {
    if (d->name == qualified) return d;
  }
  return nullptr;
}

std::shared_ptr<const VisxDef> Registry::resolve(Name written, std::string_view current_ns) const {
  if (written.qualified()) return find(written);
  if (auto d = find(Name(std::string(current_ns) + "/" + written.str()))) return d;
  return find(Name("user/" + written.str()));
}

std::string written_name(const VisxDef& def) {
  return def.ns == names().user ? def.short_name.str() : def.name.str();
}

namespace {

std::string path_text(const Vec& path) {
  if (path.size() == 1) return print_datum(path[0]);
  return print_datum(Value::vector(path));
}

// Name in a `^{:visx Name}` tag, or nullopt when `form` is not tagged.
std::optional<Name> tag_of(const Value& form) {
  if (!form.has_meta() || !form.meta().is(Kind::map)) return std::nullopt;
  const Value* tag = form.meta().find(Value::keyword(names().visx));
  if (!tag) return std::nullopt;
  if (tag->is(Kind::symbol)) return tag->as_name();
  if (tag->is(Kind::boolean) && tag->as_bool() && form.is(Kind::list) && !form.items().empty() &&
      form.items()[0].is(Kind::symbol)) {
    return form.items()[0].as_name();
  }
  return std::nullopt;
}

class Scanner {
 public:
  explicit Scanner(const Registry& registry) : registry_(registry) {}

  void top_level(const std::vector<Value>& forms) {
    std::string ns = "user";
    for (const auto& f : forms) {
      if (head_is(f, names().ns) && f.items().size() >= 2 && f.items()[1].is(Kind::symbol)) {
        ns = f.items()[1].as_name().str();
      }
      walk(f, "", ns, std::nullopt);
    }
  }

  std::vector<VisxInstance> out;

 private:
  void walk(const Value& form, const std::string& prefix, const std::string& ns,
            const std::optional<InstanceHost>& host) {
    if (auto tag = tag_of(form)) {
      record(form, *tag, prefix, ns, host);
      return;
    }
    children(form, prefix, ns, host);
  }

  void children(const Value& form, const std::string& prefix, const std::string& ns,
                const std::optional<InstanceHost>& host) {
    if (form.is_sequential()) {
      for (const auto& x : form.items()) walk(x, prefix, ns, host);
    } else if (form.is(Kind::map)) {
      for (const auto& [k, v] : form.entries()) {
        walk(k, prefix, ns, host);
        walk(v, prefix, ns, host);
      }
    }
  }

  void record(const Value& form, Name tag, const std::string& prefix, const std::string& ns,
              const std::optional<InstanceHost>& host) {
    VisxInstance inst;
    inst.def_name = tag;
    inst.form = form;
    inst.span = form.span().value_or(SourceSpan{});
    inst.host = host;
    inst.def = registry_.resolve(tag, ns);
    int& ordinal = ordinals_[prefix + tag.str()];
    inst.id = prefix + tag.str() + "#" + std::to_string(ordinal++);
    inst.state = Value::map({});

    const Vec* items = form.is(Kind::list) ? &form.items() : nullptr;
    if (!items || items->empty() || !(*items)[0].is(Kind::symbol)) {
      inst.diagnostics.push_back("tagged form is not a call of " + tag.str());
    } else if (items->size() == 2 && (*items)[1].is(Kind::map)) {
      inst.state = strip_spans((*items)[1]);
      inst.state_span = (*items)[1].span();
    } else if (items->size() != 1) {
      inst.diagnostics.push_back("instance state must be a single map literal");
    }
    if (!inst.def) {
      inst.diagnostics.push_back("unknown VIsx definition: " + tag.str());
      inst.state_with_defaults = inst.state;
    } else {
      for (const auto& [k, v] : inst.state.entries()) {
        bool known = false;
        for (const auto& [sk, sv] : inst.def->schema) known = known || structurally_equal(k, sk);
        if (!known) inst.diagnostics.push_back("state key " + print_datum(k) + " is not in the schema of " + tag.str());
      }
      inst.state_with_defaults = inst.def->with_defaults(inst.state);
    }
    std::string id = inst.id;
    Value state = inst.state;
    out.push_back(std::move(inst));

    // tagged forms written directly inside this one
    if (items) {
      for (std::size_t i = 1; i < items->size(); ++i) children((*items)[i], prefix, ns, host);
    }
    // instances inside code strings held in the state
    Vec path;
    strings(state, path, id, ns);
  }

  void strings(const Value& v, Vec& path, const std::string& host_id, const std::string& ns) {
    if (v.is(Kind::string)) {
      std::vector<Value> forms;
      try {
        forms = read_all(v.as_string());
      } catch (const Error&) {
        return;
      }
      InstanceHost host{host_id, path};
      std::string prefix = host_id + "/" + path_text(path) + "/";
      for (const auto& f : forms) walk(f, prefix, ns, host);
      return;
    }
    if (v.is(Kind::map)) {
      for (const auto& [k, x] : v.entries()) {
        path.push_back(k);
        strings(x, path, host_id, ns);
        path.pop_back();
      }
    } else if (v.is(Kind::vector)) {
      for (std::size_t i = 0; i < v.items().size(); ++i) {
        path.push_back(Value::integer(static_cast<std::int64_t>(i)));
        strings(v.items()[i], path, host_id, ns);
        path.pop_back();
      }
    }
  }

  const Registry& registry_;
  std::map<std::string, int> ordinals_;
};

void check_unary_fn(const Value& fn, const Value& clause, const char* what) {
  bool ok = fn.is(Kind::closure) && fn.as_closure()->params.size() == 1 && !fn.as_closure()->variadic;
  if (!ok) throw Error(ErrorKind::visx, std::string(what) + " must be a one-parameter fn", clause.span());
}

}  // namespace

std::vector<VisxInstance> scan(const Document& doc, const Registry& registry) {
  Scanner s(registry);
  s.top_level(doc.forms());
  return std::move(s.out);
}

std::string serialize_state(const Value& state) {
  if (auto path = find_unserializable(state)) {
    throw Error(ErrorKind::visx, "unserializable value at " + path_text(*path));
  }
  return print_datum(state);
}

Value elaborate_instance(Interpreter& interp, const VisxInstance& inst, Fuel& fuel) {
  if (!inst.def) throw Error(ErrorKind::visx, "unknown VIsx definition: " + inst.def_name.str(), inst.span);
  Value out;
  try {
    out = interp.apply(inst.def->elaborate, std::vector<Value>{inst.state_with_defaults}, fuel);
  } catch (const Error& e) {
    if (e.span() && inst.span.encloses(*e.span())) throw;
    throw e.with_span(inst.span);
  }
  if (auto bad = find_unserializable(out)) {
    throw Error(ErrorKind::visx, "elaborate of " + inst.def_name.str() + " returned a non-data value", inst.span);
  }
  return out;
}

std::string instantiate_default(Name name, const Registry& registry) {
  auto def = registry.resolve(name, "user");
  if (!def) throw Error(ErrorKind::visx, "unknown VIsx definition: " + name.str());
  std::string written = written_name(*def);
  return "^{:visx " + written + "} (" + written + " " + print_datum(def->defaults()) + ")";
}

Value define_visx(Interpreter& interp, const Value& form, Fuel& fuel) {
  const auto& s = names();
  const Vec& items = form.items();
  if (items.size() < 2 || !items[1].is(Kind::symbol) || items[1].as_name().qualified()) {
    detail::syntax_error(form, "defvisx expects an unqualified name");
  }
  Name short_name = items[1].as_name();
  Name ns = interp.current_namespace().name;
  auto def = std::make_shared<VisxDef>();
  def->short_name = short_name;
  def->ns = ns;
  def->name = Name(ns.str() + "/" + short_name.str());
  def->span = form.span();

  Vec out{items[0], items[1]};
  bool have_state = false, have_render = false, have_elaborate = false;
  for (std::size_t i = 2; i < items.size(); ++i) {
    const Value& clause = items[i];
    if (!clause.is(Kind::list) || clause.items().empty() || !clause.items()[0].is(Kind::symbol)) {
      throw Error(ErrorKind::visx, "defvisx clause must be (state ...), (render f) or (elaborate f)", clause.span());
    }
    Name head = clause.items()[0].as_name();
    const Vec& c = clause.items();
    if (head == s.state) {
      if (have_state) throw Error(ErrorKind::visx, "duplicate state clause", clause.span());
      have_state = true;
      if ((c.size() - 1) % 2 != 0) throw Error(ErrorKind::visx, "state clause needs key/default pairs", clause.span());
      Vec expanded{c[0]};
      for (std::size_t k = 1; k < c.size(); k += 2) {
        if (!c[k].is(Kind::keyword)) throw Error(ErrorKind::visx, "state key must be a keyword", c[k].span());
        for (const auto& [existing, unused] : def->schema) {
          if (structurally_equal(existing, c[k])) {
            throw Error(ErrorKind::visx, "duplicate state key " + print_datum(c[k]), c[k].span());
          }
        }
        Value init = interp.expand_detached(c[k + 1], fuel);
        Value value = interp.eval(init, fuel);
        if (!is_plain_data(value)) {
          throw Error(ErrorKind::visx, "default for " + print_datum(c[k]) + " is not plain data", c[k + 1].span());
        }
        def->schema.emplace_back(strip_spans(c[k]), strip_spans(value));
        expanded.push_back(c[k]);
        expanded.push_back(init);
      }
      out.push_back(detail::rebuild(clause, std::move(expanded)));
    } else if (head == s.render || head == s.elaborate) {
      bool render = head == s.render;
      if (render ? have_render : have_elaborate) {
        throw Error(ErrorKind::visx, "duplicate " + head.str() + " clause", clause.span());
      }
      (render ? have_render : have_elaborate) = true;
      if (c.size() != 2) throw Error(ErrorKind::visx, head.str() + " clause takes one fn", clause.span());
      Value expanded = interp.expand_detached(c[1], fuel);
      // render code only ever runs in the editor
      if (!render || interp.phase() == Phase::edit) {
        Value fn = interp.eval(expanded, fuel);
        check_unary_fn(fn, clause, render ? "render" : "elaborate");
        (render ? def->render : def->elaborate) = fn;
      }
      out.push_back(detail::rebuild(clause, {c[0], expanded}));
    } else {
      throw Error(ErrorKind::visx, "unknown defvisx clause " + head.str(), clause.span());
    }
  }
  if (!have_render) throw Error(ErrorKind::visx, "missing render clause in " + short_name.str(), form.span());
  if (!have_elaborate) throw Error(ErrorKind::visx, "missing elaborate clause in " + short_name.str(), form.span());

  std::shared_ptr<const VisxDef> shared = def;
  interp.registry().define(shared);
  auto macro = std::make_shared<Macro>();
  macro->name = def->name.str();
  macro->visx = shared;
  macro->owner = &interp;
  macro->native = [shared](Interpreter& in, const Value& call) {
    const Vec& args = call.items();
    if (args.size() > 2) {
      throw Error(ErrorKind::visx, shared->short_name.str() + " takes a single state map", call.span());
    }
    Value state = args.size() == 2 ? args[1] : Value::map({});
    if (!state.is(Kind::map)) {
      throw Error(ErrorKind::visx, "instance state must be a map literal", call.span());
    }
    Value full = shared->with_defaults(strip_spans(state));
    Value result = in.apply(shared->elaborate, std::vector<Value>{full});
    if (find_unserializable(result)) {
      throw Error(ErrorKind::visx, "elaborate of " + shared->short_name.str() + " returned a non-data value",
                  call.span());
    }
    return result;
  };
  interp.define_macro(short_name, std::move(macro));
  return detail::rebuild(form, std::move(out));
}

}  // namespace hvx
