#include "hvx/corpus.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "hvx/program.hpp"
#include "hvx/reader.hpp"

#ifndef HVX_CORPUS_DIR
#define HVX_CORPUS_DIR "corpus"
#endif

namespace hvx {

namespace fs = std::filesystem;

fs::path default_corpus_dir() {
  if (const char* env = std::getenv("HVX_CORPUS_DIR")) return env;
  return HVX_CORPUS_DIR;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::session, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<FixtureSpec> load_manifest(const fs::path& dir) {
  Json m;
  try {
    m = Json::parse(read_text_file(dir / "manifest.json"));
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::session, "bad manifest: " + std::string(e.what()));
  }
  std::vector<FixtureSpec> out;
  for (const auto& f : m.at("fixtures")) {
    FixtureSpec s;
    s.name = f.at("name").get<std::string>();
    s.source = dir / f.at("source").get<std::string>();
    if (f.contains("oracle")) s.oracle = dir / f["oracle"].get<std::string>();
    if (f.contains("events")) s.events = dir / f["events"].get<std::string>();
    if (f.contains("value")) s.value = f["value"].get<std::string>();
    if (f.contains("output")) s.output = f["output"].get<std::string>();
    if (f.contains("instances")) s.instances = f["instances"].get<int>();
    out.push_back(std::move(s));
  }
  return out;
}

FixtureSpec find_fixture(const std::vector<FixtureSpec>& specs, std::string_view name) {
  for (const auto& s : specs) {
    if (s.name == name) return s;
  }
  throw Error(ErrorKind::session, "no fixture named " + std::string(name));
}

namespace {

std::string describe(const ProgramResult& r) {
  if (r.ok) return print_datum(r.value);
  return "error: " + (r.error ? std::string(r.error->what()) : std::string("?"));
}

const UiNode* nth_with_attr(const UiNode& node, const std::string& attr, std::size_t& nth) {
  if (node.type == UiNode::Type::element) {
    const UiAttr* a = node.attr(attr);
    if (a && a->type == UiAttr::Type::handler) {
      if (nth == 0) return &node;
      --nth;
    }
    for (const auto& c : node.children) {
      if (const UiNode* hit = nth_with_attr(c, attr, nth)) return hit;
    }
  }
  return nullptr;
}

// States of every instance, keyed by id.
std::map<std::string, Value> all_states(const Session& s) {
  std::map<std::string, Value> out;
  for (const auto& inst : s.instances()) {
    if (auto st = s.state(inst.id)) out.emplace(inst.id, *st);
  }
  return out;
}

bool same_states(const std::map<std::string, Value>& a, const std::map<std::string, Value>& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [id, v] : a) {
    auto it = b.find(id);
    if (it == b.end() || !structurally_equal(v, it->second)) return false;
  }
  return true;
}

void check_expectations(const Json& step, Session& s, const EditOutcome* outcome, std::size_t index,
                        const std::string& source, TranscriptResult& r) {
  auto fail = [&](const std::string& msg) {
    r.passed = false;
    r.diffs.push_back("step " + std::to_string(index) + ": " + msg);
  };
  if (step.contains("expect_text_contains")) {
    for (const auto& needle : step["expect_text_contains"]) {
      if (s.text().find(needle.get<std::string>()) == std::string::npos) {
        fail("text lacks " + needle.get<std::string>());
      }
    }
  }
  if (step.contains("expect_text_lacks")) {
    for (const auto& needle : step["expect_text_lacks"]) {
      if (s.text().find(needle.get<std::string>()) != std::string::npos) {
        fail("text still contains " + needle.get<std::string>());
      }
    }
  }
  if (step.value("expect_source_text", false) && s.text() != source) fail("text differs from the source");
  if (step.contains("expect_state")) {
    for (const auto& [id, want] : step["expect_state"].items()) {
      auto got = s.state(id);
      if (!got) {
        fail("no instance " + id);
      } else if (!structurally_equal(*got, json_to_datum(want))) {
        fail("state of " + id + " is " + print_datum(*got) + ", expected " + print_datum(json_to_datum(want)));
      }
    }
  }
  if (step.contains("expect_deltas")) {
    const Json& want = step["expect_deltas"];
    Json got = Json::array();
    if (outcome) {
      for (const auto& d : outcome->deltas) got.push_back({{"span", span_to_json(d.span)}, {"replacement", d.replacement}});
    }
    if (got != want) fail("deltas " + got.dump() + ", expected " + want.dump());
  }
  if (step.contains("expect_instances")) {
    auto n = s.instances().size();
    if (n != step["expect_instances"].get<std::size_t>()) fail("instance count " + std::to_string(n));
  }
  if (step.contains("expect_diagnostics")) {
    auto n = s.diagnostics().size() + (outcome ? outcome->diagnostics.size() : 0);
    if (outcome) n = outcome->diagnostics.size() > s.diagnostics().size() ? outcome->diagnostics.size() : n;
    if (n != step["expect_diagnostics"].get<std::size_t>()) fail("diagnostic count " + std::to_string(n));
  }
}

}  // namespace

std::optional<std::string> find_handler(Session& session, const std::string& instance, const std::string& attr,
                                        std::size_t nth) {
  RenderResult r = session.render(instance);
  if (!r.tree) return std::nullopt;
  const UiNode* node = nth_with_attr(*r.tree, attr, nth);
  if (!node) return std::nullopt;
  return node->attr(attr)->handler;
}

TranscriptResult replay_transcript(const std::string& text, const Json& steps, const SessionOptions& options) {
  TranscriptResult r;
  auto s = std::make_unique<Session>(text, options);
  s->render_all();
  std::size_t index = 0;
  for (const auto& step : steps) {
    ++index;
    auto fail = [&](const std::string& msg) {
      r.passed = false;
      r.diffs.push_back("step " + std::to_string(index) + ": " + msg);
    };
    std::string op = step.value("op", "");
    std::optional<EditOutcome> outcome;
    try {
      if (op == "render") {
        auto renders = s->render_all();
        std::size_t errors = 0;
        for (const auto& rr : renders) errors += rr.error ? 1 : 0;
        if (step.contains("expect_render_errors") && errors != step["expect_render_errors"].get<std::size_t>()) {
          fail("render errors " + std::to_string(errors));
        }
      } else if (op == "event") {
        std::string id = step.at("instance").get<std::string>();
        auto h = find_handler(*s, id, step.at("attr").get<std::string>(), step.value("nth", std::size_t{0}));
        if (!h) {
          fail("no handler " + step["attr"].get<std::string>() + " in " + id);
          continue;
        }
        Value payload = step.contains("payload") ? json_to_datum(step["payload"]) : Value();
        outcome = s->dispatch(UiEvent{*h, payload});
        s->render_all();
      } else if (op == "setState") {
        outcome = s->set_state(step.at("instance").get<std::string>(), json_to_datum(step.at("path")).items(),
                              json_to_datum(step.at("value")));
      } else if (op == "textEdit") {
        std::string find = step.at("find").get<std::string>();
        auto at = s->text().find(find);
        if (at == std::string::npos) {
          fail("text lacks " + find);
          continue;
        }
        outcome = s->apply_text_edit(SourceSpan{at, at + find.size()}, step.at("replace").get<std::string>());
      } else if (op == "insertVisx") {
        std::size_t at = s->text().size();
        if (step.contains("before")) {
          at = s->text().find(step["before"].get<std::string>());
          if (at == std::string::npos) {
            fail("text lacks " + step["before"].get<std::string>());
            continue;
          }
        }
        outcome = s->insert_visx(Name(step.at("name").get<std::string>()), at);
      } else if (op == "run") {
        ProgramResult pr = s->run();
        r.last_run = pr;
        if (step.contains("expect_value") && (!pr.ok || print_datum(pr.value) != step["expect_value"].get<std::string>())) {
          fail("run gave " + describe(pr) + ", expected " + step["expect_value"].get<std::string>());
        }
        if (step.contains("expect_ok") && pr.ok != step["expect_ok"].get<bool>()) fail("run gave " + describe(pr));
        if (step.contains("expect_output") && pr.output != step["expect_output"].get<std::string>()) {
          fail("run printed " + pr.output);
        }
        if (step.contains("expect_error")) {
          std::string needle = step["expect_error"].get<std::string>();
          if (pr.ok || !pr.error || std::string(pr.error->what()).find(needle) == std::string::npos) {
            fail("run gave " + describe(pr) + ", expected an error mentioning " + needle);
          }
        }
      } else if (op == "reopen") {
        auto before = all_states(*s);
        std::string saved = s->text();
        s = std::make_unique<Session>(saved, options);
        s->render_all();
        if (!same_states(before, all_states(*s))) fail("states differ after reopen");
      } else {
        fail("unknown op " + op);
        continue;
      }
    } catch (const Error& e) {
      if (!step.contains("expect_failure")) {
        fail(op + " threw " + e.what());
        continue;
      }
      if (std::string(e.what()).find(step["expect_failure"].get<std::string>()) == std::string::npos) {
        fail(op + " threw " + e.what());
      }
      continue;
    }
    check_expectations(step, *s, outcome ? &*outcome : nullptr, index, text, r);
  }
  r.final_text = s->text();
  return r;
}

TranscriptResult fixture_events(const FixtureSpec& spec, const SessionOptions& options) {
  if (!spec.events) {
    TranscriptResult r;
    r.final_text = read_text_file(spec.source);
    return r;
  }
  Json t = Json::parse(read_text_file(*spec.events));
  return replay_transcript(read_text_file(spec.source), t.at("steps"), options);
}

FixtureReport fixture_check(const FixtureSpec& spec, const SessionOptions& options) {
  FixtureReport rep;
  rep.name = spec.name;
  std::string text;
  try {
    text = read_text_file(spec.source);
  } catch (const Error& e) {
    rep.fail(e.what());
    return rep;
  }

  // reader round trip
  try {
    for (const auto& f : read_all(text)) {
      Value again = read_one(print_datum(f));
      if (!equal_with_meta(f, again)) rep.fail("reprint changes " + print_datum(f).substr(0, 60));
    }
  } catch (const Error& e) {
    rep.fail(std::string("read: ") + e.what());
    return rep;
  }

  // without a session
  ProgramResult plain = run_program(text, options.run);
  rep.value = describe(plain);
  if (!plain.ok) rep.fail("run failed: " + describe(plain));
  if (spec.value && rep.value != *spec.value) rep.fail("value " + rep.value + ", expected " + *spec.value);
  if (spec.output && plain.output != *spec.output) rep.fail("output " + plain.output + ", expected " + *spec.output);

  // through a session
  {
    Session s(text, options);
    if (spec.instances >= 0 && s.instances().size() != static_cast<std::size_t>(spec.instances)) {
      rep.fail("instances " + std::to_string(s.instances().size()) + ", expected " + std::to_string(spec.instances));
    }
    for (const auto& r : s.render_all()) {
      if (r.error) rep.fail("render " + r.instance + ": " + r.error->message);
    }
    ProgramResult via = s.run();
    if (via.ok != plain.ok || (plain.ok && !values_equal(via.value, plain.value)) || via.output != plain.output) {
      rep.fail("session run " + describe(via) + " differs from plain run " + describe(plain));
    }
    Session reopened(s.text(), options);
    if (!same_states(all_states(s), all_states(reopened))) rep.fail("states differ after reopen");
  }

  if (spec.oracle) {
    ProgramResult o = run_program(read_text_file(*spec.oracle), options.run);
    if (!o.ok) {
      rep.fail("oracle failed: " + describe(o));
    } else if (plain.ok && !structurally_equal(o.value, plain.value)) {
      rep.fail("oracle " + describe(o) + " differs from " + rep.value);
    }
  }

  if (spec.events) {
    try {
      TranscriptResult t = fixture_events(spec, options);
      for (auto& d : t.diffs) rep.fail("events: " + d);
      Session reopened(t.final_text, options);
      if (!reopened.parsed()) rep.fail("events left an unparseable document");
    } catch (const std::exception& e) {
      rep.fail(std::string("events: ") + e.what());
    }
  }

  // injected faults: the document stays editable and renderable
  {
    Session s(text, options);
    auto base = s.render_all();
    const std::size_t end = s.text().size();
    s.apply_text_edit(SourceSpan{end, end}, "\n(throw \"injected\")\n");
    ProgramResult crashed = s.run();
    if (crashed.ok || s.run_status() != RunStatus::crashed) rep.fail("injected runtime fault did not crash the run");
    auto after = s.render_all();
    if (after.size() != base.size()) rep.fail("render set changed after a crashed run");
    for (const auto& r : after) {
      if (r.error) rep.fail("render broken after crash: " + r.error->message);
    }
    s.apply_text_edit(SourceSpan{end, s.text().size()}, "");
    if (s.text() != text) rep.fail("could not remove the injected fault");
  }
  return rep;
}

}  // namespace hvx
