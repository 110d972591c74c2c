#include "hvx/session.hpp"

#include <algorithm>

#include "internal.hpp"

namespace hvx {

using detail::brief;

std::string_view run_status_name(RunStatus status) {
  switch (status) {
    case RunStatus::idle: return "idle";
    case RunStatus::running: return "running";
    case RunStatus::stopped: return "stopped";
    case RunStatus::crashed: return "crashed";
  }
  return "?";
}

const UiAttr* UiNode::attr(std::string_view name) const {
  for (const auto& [k, v] : attrs) {
    if (k == name) return &v;
  }
  return nullptr;
}

namespace {

constexpr int kMaxUiDepth = 200;

Value set_in(const Value& coll, std::span<const Value> path, const Value& val) {
  if (path.empty()) return val;
  const Value& key = path[0];
  if (coll.is(Kind::vector)) {
    if (!key.is(Kind::integer) || key.as_int() < 0 || static_cast<std::size_t>(key.as_int()) >= coll.items().size()) {
      throw Error(ErrorKind::session, "state path index out of range: " + brief(key));
    }
    Vec items = coll.items();
    auto i = static_cast<std::size_t>(key.as_int());
    items[i] = set_in(items[i], path.subspan(1), val);
    return Value::vector(std::move(items)).with_meta(coll.meta());
  }
  if (!coll.is(Kind::map) && !coll.is_nil()) throw Error(ErrorKind::session, "state path goes through a non-map value");
  const Value* inner = coll.is(Kind::map) ? coll.find(key) : nullptr;
  Value base = coll.is_nil() ? Value::map({}) : coll;
  return assoc(base, key, set_in(inner ? *inner : Value(), path.subspan(1), val));
}

Value get_in(const Value& coll, std::span<const Value> path) {
  Value cur = coll;
  for (const auto& k : path) {
    if (cur.is(Kind::map)) {
      const Value* v = cur.find(k);
      cur = v ? *v : Value();
    } else if (cur.is(Kind::vector) && k.is(Kind::integer) && k.as_int() >= 0 &&
               static_cast<std::size_t>(k.as_int()) < cur.items().size()) {
      cur = cur.items()[static_cast<std::size_t>(k.as_int())];
    } else {
      return Value();
    }
  }
  return cur;
}

bool path_like(const Value& v) {
  if (!v.is(Kind::vector) || v.items().empty()) return false;
  return std::all_of(v.items().begin(), v.items().end(), [](const Value& x) {
    return x.is(Kind::keyword) || x.is(Kind::integer) || x.is(Kind::string);
  });
}

std::string instance_text(const VisxInstance& inst, const std::string& state) {
  std::string name = inst.def ? written_name(*inst.def) : inst.def_name.str();
  return "^{:visx " + name + "} (" + name + " " + state + ")";
}

std::size_t host_depth(const VisxInstance& inst) {
  return inst.host ? static_cast<std::size_t>(std::count(inst.id.begin(), inst.id.end(), '#')) : 0;
}

}  // namespace

Session::Session(std::string text, SessionOptions options) : options_(options) { set_text(std::move(text)); }

Session::~Session() {
  if (run_) run_->stop();
}

const Document& Session::document() const {
  if (!doc_) throw Error(ErrorKind::session, "document does not parse");
  return *doc_;
}

const VisxInstance* Session::instance(std::string_view id) const {
  for (const auto& inst : instances_) {
    if (inst.id == id) return &inst;
  }
  return nullptr;
}

std::optional<Value> Session::state(std::string_view id) const {
  auto it = boxes_.find(std::string(id));
  if (it == boxes_.end()) return std::nullopt;
  return it->second.as_box().value;
}

std::optional<SourceSpan> Session::document_span(const VisxInstance& inst) const {
  if (!inst.host) return inst.span;
  const VisxInstance* host = instance(inst.host->host_id);
  return host ? document_span(*host) : std::nullopt;
}

void Session::set_text(std::string text) {
  text_ = std::move(text);
  std::optional<Error> read_error;
  try {
    doc_.emplace(text_);
  } catch (const Error& e) {
    doc_.reset();
    read_error = e;
  }
  reload();
  if (read_error) diagnostics_.push_back({read_error->span(), Phase::edit, read_error->what(), ""});
}

void Session::reload() {
  diagnostics_.clear();
  instances_.clear();
  handlers_.clear();
  InterpreterOptions io;
  io.expand_fuel = options_.edit_fuel;
  world_ = std::make_unique<Interpreter>(Phase::edit, io);
  if (!doc_) return;

  auto loaded = world_->load(doc_->forms(), false);
  instances_ = scan(*doc_, world_->registry());
  for (const auto& lf : loaded) {
    if (!lf.error) continue;
    Diagnostic d{lf.error->span(), Phase::edit, lf.error->what(), ""};
    if (d.span) {
      for (const auto& inst : instances_) {
        if (!inst.host && inst.span.encloses(*d.span)) d.instance = inst.id;
      }
    }
    diagnostics_.push_back(std::move(d));
  }
  for (const auto& inst : instances_) {
    for (const auto& msg : inst.diagnostics) diagnostics_.push_back({document_span(inst), Phase::edit, msg, inst.id});
  }

  std::map<std::string, Value> next;
  for (const auto& inst : instances_) {
    if (!inst.def) continue;
    auto it = boxes_.find(inst.id);
    if (it != boxes_.end()) {
      if (!structurally_equal(it->second.as_box().value, inst.state_with_defaults)) {
        it->second.as_box().set(inst.state_with_defaults);
      }
      next.emplace(inst.id, it->second);
    } else {
      next.emplace(inst.id, Value::box(inst.state_with_defaults));
    }
  }
  boxes_ = std::move(next);
}

// ---------------------------------------------------------------------------
// rendering

void Session::add_attr(UiNode& node, const Value& key, const Value& val, const std::string& instance) {
  if (!key.is(Kind::keyword)) throw Error(ErrorKind::visx, "attribute names must be keywords, got " + brief(key));
  UiAttr attr;
  if (val.is(Kind::closure) || val.is(Kind::builtin)) {
    attr.type = UiAttr::Type::handler;
    attr.handler = "h:" + std::to_string(++next_handler_);
    handlers_[attr.handler] = Handler{instance, val};
  } else if (key.as_name().str() == "path") {
    if (!path_like(val)) throw Error(ErrorKind::visx, ":path must be a non-empty vector of keys, got " + brief(val));
    attr.type = UiAttr::Type::path;
    attr.path = strip_spans(val).items();
  } else if (is_plain_data(val)) {
    attr.data = strip_spans(val);
  } else {
    throw Error(ErrorKind::visx, "attribute " + brief(key) + " holds a runtime value");
  }
  node.attrs.emplace_back(key.as_name().str(), std::move(attr));
}

UiNode Session::to_ui(const Value& h, const std::string& instance, int depth) {
  if (depth > kMaxUiDepth) throw Error(ErrorKind::depth, "rendered tree nested too deeply");
  UiNode node;
  switch (h.kind()) {
    case Kind::nil:
      node.tag = "fragment";
      return node;
    case Kind::string:
    case Kind::integer:
    case Kind::floating:
    case Kind::boolean:
    case Kind::keyword:
    case Kind::symbol:
      node.type = UiNode::Type::text;
      node.text = display_string(h);
      return node;
    case Kind::list:
      node.tag = "fragment";
      for (const auto& c : h.items()) {
        if (!c.is_nil()) node.children.push_back(to_ui(c, instance, depth + 1));
      }
      return node;
    case Kind::vector:
      break;
    default:
      throw Error(ErrorKind::visx, "cannot render " + std::string(kind_name(h.kind())));
  }
  const Vec& items = h.items();
  if (items.empty()) throw Error(ErrorKind::visx, "empty element vector");
  if (items[0].is(Kind::closure) || items[0].is(Kind::builtin)) {
    Value out = world_->apply(items[0], std::span<const Value>(items).subspan(1));
    return to_ui(out, instance, depth + 1);
  }
  if (!items[0].is(Kind::keyword)) throw Error(ErrorKind::visx, "element must start with a tag keyword: " + brief(h));
  node.tag = items[0].as_name().str();
  std::size_t i = 1;
  if (items.size() > 1 && items[1].is(Kind::map)) {
    for (const auto& [k, v] : items[1].entries()) add_attr(node, k, v, instance);
    i = 2;
  }
  // seqs among the children are spliced in place
  std::vector<const Value*> stack;
  for (std::size_t j = items.size(); j > i; --j) stack.push_back(&items[j - 1]);
  while (!stack.empty()) {
    const Value* c = stack.back();
    stack.pop_back();
    if (c->is_nil()) continue;
    if (c->is(Kind::list)) {
      for (std::size_t j = c->items().size(); j > 0; --j) stack.push_back(&c->items()[j - 1]);
      continue;
    }
    node.children.push_back(to_ui(*c, instance, depth + 1));
  }
  if (node.tag == "code-editor" && !node.attr("path")) {
    throw Error(ErrorKind::visx, ":code-editor needs a :path attribute naming a string field of the state");
  }
  return node;
}

RenderResult Session::render(std::string_view id) {
  const VisxInstance* inst = instance(id);
  if (!inst) throw Error(ErrorKind::session, "unknown instance " + std::string(id));
  RenderResult r;
  r.instance = inst->id;
  r.span = document_span(*inst).value_or(SourceSpan{});
  for (auto it = handlers_.begin(); it != handlers_.end();) {
    it = it->second.instance == inst->id ? handlers_.erase(it) : std::next(it);
  }
  auto fail = [&](const std::string& message) {
    r.error = Diagnostic{r.span, Phase::edit, message, inst->id};
    return r;
  };
  if (!inst->def) return fail("unknown VIsx definition: " + inst->def_name.str());
  if (inst->def->render.is_nil()) return fail(inst->def_name.str() + " has no render function");
  auto box = boxes_.find(inst->id);
  if (box == boxes_.end()) return fail("instance has no state");
  Fuel fuel(options_.edit_fuel);
  try {
    FuelScope scope(*world_, fuel);
    Value h = world_->apply(inst->def->render, std::vector<Value>{box->second});
    r.tree = to_ui(h, inst->id, 0);
  } catch (const Error& e) {
    for (auto it = handlers_.begin(); it != handlers_.end();) {
      it = it->second.instance == inst->id ? handlers_.erase(it) : std::next(it);
    }
    return fail("render failed: " + std::string(e.what()));
  }
  return r;
}

std::vector<RenderResult> Session::render_all() {
  handlers_.clear();
  std::vector<RenderResult> out;
  for (const auto& inst : instances_) out.push_back(render(inst.id));
  return out;
}

// ---------------------------------------------------------------------------
// edits

EditOutcome Session::write_back(const std::map<std::string, std::uint64_t>& versions,
                                const std::map<std::string, Value>& snapshot) {
  auto revert = [&] {
    for (auto& [id, box] : boxes_) {
      auto v = versions.find(id);
      if (v != versions.end() && box.as_box().version != v->second) box.as_box().set(snapshot.at(id));
    }
  };
  std::vector<const VisxInstance*> changed;
  for (const auto& inst : instances_) {
    auto box = boxes_.find(inst.id);
    auto v = versions.find(inst.id);
    if (box != boxes_.end() && v != versions.end() && box->second.as_box().version != v->second) {
      changed.push_back(&inst);
    }
  }
  if (changed.empty()) return {};

  EditOutcome outcome;
  const VisxInstance* current = nullptr;
  try {
    // nested instances first, deepest and rightmost first, so each write into
    // a host string uses spans that are still valid
    std::vector<const VisxInstance*> nested;
    for (const auto* inst : changed) {
      if (inst->host) nested.push_back(inst);
    }
    std::sort(nested.begin(), nested.end(), [](const VisxInstance* a, const VisxInstance* b) {
      if (host_depth(*a) != host_depth(*b)) return host_depth(*a) > host_depth(*b);
      if (a->host->host_id != b->host->host_id) return a->host->host_id < b->host->host_id;
      return a->span.start > b->span.start;
    });
    for (const auto* inst : nested) {
      current = inst;
      std::string state = serialize_state(boxes_.at(inst->id).as_box().value);
      const VisxInstance* host = instance(inst->host->host_id);
      if (!host) throw Error(ErrorKind::session, "host instance vanished");
      Value& host_box = boxes_.at(host->id);
      Value code = get_in(host_box.as_box().value, inst->host->path);
      if (!code.is(Kind::string)) throw Error(ErrorKind::session, "host field is no longer a string");
      std::string s = code.as_string();
      SourceSpan target = inst->state_span ? *inst->state_span : inst->span;
      std::string replacement = inst->state_span ? state : instance_text(*inst, state);
      if (target.end > s.size()) throw Error(ErrorKind::session, "nested instance span out of range");
      s.replace(target.start, target.size(), replacement);
      host_box.as_box().set(set_in(host_box.as_box().value, inst->host->path, Value::string(s)));
      if (std::find(changed.begin(), changed.end(), host) == changed.end()) changed.push_back(host);
    }

    std::vector<std::pair<SourceSpan, std::string>> edits;
    for (const auto* inst : changed) {
      if (inst->host) continue;
      current = inst;
      std::string state = serialize_state(boxes_.at(inst->id).as_box().value);
      if (inst->state_span) {
        edits.emplace_back(*inst->state_span, state);
      } else {
        edits.emplace_back(inst->span, instance_text(*inst, state));
      }
    }
    // an instance written inside another changed instance is carried by the outer edit
    std::vector<std::pair<SourceSpan, std::string>> kept;
    for (const auto& e : edits) {
      bool inner = std::any_of(edits.begin(), edits.end(), [&](const auto& o) {
        return &o != &e && o.first.encloses(e.first) && !(o.first == e.first);
      });
      if (!inner) kept.push_back(e);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.first.start > b.first.start; });
    current = nullptr;
    Document doc = *doc_;
    for (const auto& [span, replacement] : kept) {
      doc = doc.splice(span, replacement);
      outcome.deltas.push_back({span, replacement});
    }
    set_text(doc.text());
  } catch (const Error& e) {
    revert();
    std::optional<SourceSpan> span = current ? document_span(*current) : std::nullopt;
    outcome.deltas.clear();
    outcome.diagnostics.push_back({span, Phase::edit, "state write-back failed: " + std::string(e.what()),
                                   current ? current->id : std::string()});
    return outcome;
  }
  outcome.diagnostics = diagnostics_;
  return outcome;
}

EditOutcome Session::dispatch(const UiEvent& event) {
  if (!doc_) throw Error(ErrorKind::session, "document does not parse");
  auto it = handlers_.find(event.handler);
  if (it == handlers_.end()) throw Error(ErrorKind::session, "stale handler " + event.handler);
  Handler handler = it->second;

  std::map<std::string, std::uint64_t> versions;
  std::map<std::string, Value> snapshot;
  for (const auto& [id, box] : boxes_) {
    versions[id] = box.as_box().version;
    snapshot[id] = box.as_box().value;
  }
  Fuel fuel(options_.edit_fuel);
  try {
    Vec args;
    bool nullary = handler.fn.is(Kind::closure) && handler.fn.as_closure()->params.empty() &&
                   !handler.fn.as_closure()->variadic;
    if (!nullary) args.push_back(event.payload);
    world_->apply(handler.fn, args, fuel);
  } catch (const Error& e) {
    for (auto& [id, box] : boxes_) {
      if (box.as_box().version != versions[id]) box.as_box().set(snapshot[id]);
    }
    const VisxInstance* inst = instance(handler.instance);
    EditOutcome out;
    out.diagnostics.push_back({inst ? document_span(*inst) : std::nullopt, Phase::edit,
                               "handler failed: " + std::string(e.what()), handler.instance});
    return out;
  }
  return write_back(versions, snapshot);
}

EditOutcome Session::set_state(std::string_view id, const Vec& path, const Value& value) {
  if (!doc_) throw Error(ErrorKind::session, "document does not parse");
  auto box = boxes_.find(std::string(id));
  if (box == boxes_.end()) throw Error(ErrorKind::session, "unknown instance " + std::string(id));
  std::map<std::string, std::uint64_t> versions;
  std::map<std::string, Value> snapshot;
  for (const auto& [bid, b] : boxes_) {
    versions[bid] = b.as_box().version;
    snapshot[bid] = b.as_box().value;
  }
  box->second.as_box().set(set_in(box->second.as_box().value, path, value));
  return write_back(versions, snapshot);
}

EditOutcome Session::apply_text_edit(SourceSpan span, std::string_view replacement) {
  if (span.start > span.end || span.end > text_.size()) throw Error(ErrorKind::session, "edit span out of range");
  std::string next = text_;
  next.replace(span.start, span.size(), replacement);
  set_text(std::move(next));
  EditOutcome out;
  out.deltas.push_back({span, std::string(replacement)});
  out.diagnostics = diagnostics_;
  return out;
}

EditOutcome Session::insert_visx(Name name, std::size_t offset) {
  if (!doc_) throw Error(ErrorKind::session, "document does not parse");
  if (offset > text_.size()) throw Error(ErrorKind::session, "insertion offset out of range");
  if (auto at = doc_->locate(offset)) {
    bool atom = !at->is_sequential() && !at->is(Kind::map);
    if (atom && at->span() && at->span()->start < offset) {
      throw Error(ErrorKind::session, "insertion offset falls inside a token");
    }
  }
  std::string text = instantiate_default(name, world_->registry());
  std::string next = text_;
  next.insert(offset, text);
  try {
    Document check(next);
  } catch (const Error& e) {
    throw Error(ErrorKind::session, "insertion would not parse: " + std::string(e.what()));
  }
  set_text(std::move(next));
  EditOutcome out;
  out.deltas.push_back({SourceSpan{offset, offset}, text});
  out.diagnostics = diagnostics_;
  return out;
}

// ---------------------------------------------------------------------------
// run phase

void Session::start_run() {
  if (run_status_ == RunStatus::running) stop_run();
  run_.reset();
  run_output_.clear();
  all_output_.clear();
  crash_reason_.clear();
  last_run_.reset();
  CompiledProgram program;
  try {
    program = compile_program(text_, options_.run);
  } catch (const Error& e) {
    ProgramResult failed;
    failed.error = e;
    failed.phase = e.kind() == ErrorKind::read ? Phase::edit : Phase::compile;
    last_run_ = failed;
    run_status_ = RunStatus::crashed;
    crash_reason_ = e.what();
    return;
  }
  run_ = std::make_unique<RunTask>(std::move(program), options_.run);
  run_status_ = RunStatus::running;
}

void Session::finish_run_bookkeeping() {
  std::string tail = run_->take_output();
  run_output_ += tail;
  all_output_ += tail;
  ProgramResult r = run_->result();
  r.output = all_output_;
  last_run_ = r;
  if (r.ok) {
    run_status_ = RunStatus::idle;
  } else if (r.error && r.error->kind() == ErrorKind::stopped) {
    run_status_ = RunStatus::stopped;
  } else {
    run_status_ = RunStatus::crashed;
    crash_reason_ = r.error ? r.error->what() : "unknown failure";
  }
}

bool Session::step_run() {
  if (!run_ || run_status_ != RunStatus::running) return true;
  bool done = run_->step();
  if (done) {
    finish_run_bookkeeping();
    return true;
  }
  std::string chunk = run_->take_output();
  all_output_ += chunk;
  run_output_ += chunk;
  return false;
}

void Session::stop_run() {
  if (!run_ || run_status_ != RunStatus::running) throw Error(ErrorKind::session, "not running");
  run_->stop();
  finish_run_bookkeeping();
}

ProgramResult Session::run() {
  start_run();
  while (!step_run()) {
  }
  return *last_run_;
}

std::string Session::take_run_output() {
  std::string out = std::move(run_output_);
  run_output_.clear();
  return out;
}

}  // namespace hvx
