#pragma once

// End-to-end checks shared by the acceptance binary and the gtest suites.
// Each returns ok plus a line of detail; all tolerances are fixed here.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "hvx/corpus.hpp"
#include "hvx/program.hpp"
#include "hvx/session.hpp"
#include "support/gen.hpp"
#include "support/oracles.hpp"

namespace hvx::criteria {

inline constexpr std::uint64_t kQuantum = 100'000;
inline constexpr double kBezierTol = 1e-12;
inline constexpr int kPersistenceScripts = 120;
inline constexpr int kRandomTrees = 50;

struct Outcome {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

inline std::string fixture_text(const std::string& file) { return read_text_file(default_corpus_dir() / file); }

struct CliResult {
  int status = -1;
  std::string out;
};

/// Runs the hvx executable; stderr is merged into the output when asked.
inline CliResult run_cli(const std::string& args, bool merge_stderr = false) {
  std::string cmd = std::string(HVX_CLI) + " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
  CliResult r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
  int st = ::pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

inline std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / ("hvx-check-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f << text;
}

inline const UiNode* find_tag(const UiNode& n, std::string_view tag) {
  if (n.type == UiNode::Type::element && n.tag == tag) return &n;
  for (const auto& c : n.children) {
    if (const UiNode* hit = find_tag(c, tag)) return hit;
  }
  return nullptr;
}

inline std::vector<std::pair<std::string, std::string>> live_handlers(Session& s) {
  std::vector<std::pair<std::string, std::string>> hs;
  for (const auto& r : s.render_all()) {
    if (r.tree) testgen::collect_handlers(*r.tree, hs);
  }
  return hs;
}

/// Checks that a run world shares nothing with an edit world: no value
/// identity in common, no edit closures, no boxes, and exactly the globals a
/// session-free run of `text` defines.
inline void audit_run_world(const Interpreter& run_world, const Interpreter& edit_world, const std::string& text,
                            Outcome& o) {
  std::set<const void*> edit_values;
  for (const auto& [name, v] : edit_world.enumerate_bindings()) edit_values.insert(v.identity());
  std::set<std::string> names;
  for (const auto& [name, v] : run_world.enumerate_bindings()) {
    names.insert(name);
    if (edit_values.count(v.identity())) o.fail("run binding " + name + " is an edit-phase value");
    if (v.is(Kind::closure) && v.as_closure()->owner != &run_world) o.fail("run binding " + name + " is a foreign closure");
    if (v.is(Kind::box)) o.fail("run binding " + name + " is a state box");
  }
  RunTask fresh(compile_program(text), {});
  fresh.finish();
  std::set<std::string> fresh_names;
  for (const auto& [name, v] : fresh.world().enumerate_bindings()) fresh_names.insert(name);
  if (names != fresh_names) o.fail("run world bindings differ from a session-free run");
}

// ---- criteria ----

inline Outcome counter_end_to_end() {
  Outcome o;
  std::string text = fixture_text("counter.hvx");
  auto dir = scratch_dir();
  write_file(dir / "before.hvx", text);
  CliResult before = run_cli("run " + (dir / "before.hvx").string());
  if (before.status != 0 || before.out != "42\n") o.fail("cli before click printed '" + before.out + "'");
  Session s(text);
  auto renders = s.render_all();
  if (renders.size() != 1 || !renders[0].tree) {
    o.fail("counter did not render");
    return o;
  }
  const UiNode* button = find_tag(*renders[0].tree, "button");
  const UiAttr* click = button ? button->attr("on-click") : nullptr;
  if (!click || click->type != UiAttr::Type::handler) {
    o.fail("no on-click handler");
    return o;
  }
  EditOutcome out = s.dispatch({click->handler, Value()});
  if (s.text().find("{:count 43}") == std::string::npos) o.fail("text lacks {:count 43}");
  if (out.deltas.size() != 1 || out.deltas[0].replacement != "{:count 43}") o.fail("unexpected delta");
  write_file(dir / "after.hvx", s.text());
  CliResult after = run_cli("run " + (dir / "after.hvx").string());
  if (after.status != 0 || after.out != "43\n") o.fail("cli after click printed '" + after.out + "'");
  std::filesystem::remove_all(dir);
  if (o.ok) o.detail = "click wrote {:count 43}; cli printed 42 then 43";
  return o;
}

inline Outcome backwards_compatibility() {
  Outcome o;
  auto specs = load_manifest(default_corpus_dir());
  int n = 0;
  for (const auto& spec : specs) {
    std::string text = read_text_file(spec.source);
    // cli process: no session exists anywhere in it
    CliResult cli = run_cli("run --json " + spec.source.string());
    Json cj;
    try {
      cj = Json::parse(cli.out);
    } catch (const std::exception&) {
      o.fail(spec.name + ": cli output is not JSON");
      continue;
    }
    ProgramResult plain = run_program(text);
    Session s(text);
    s.render_all();
    ProgramResult via = s.run();
    if (!plain.ok || !via.ok || !cj["ok"].get<bool>()) {
      o.fail(spec.name + ": a run failed");
      continue;
    }
    std::string sv = print_datum(via.value);
    if (!structurally_equal(plain.value, via.value) || cj["value"] != sv || plain.output != via.output ||
        cj["output"] != via.output) {
      o.fail(spec.name + ": cli " + cj["value"].dump() + " vs session " + sv);
    }
    ++n;
  }
  if (o.ok) o.detail = std::to_string(n) + " fixtures agree (cli process, in-process plain run, session Run)";
  return o;
}

inline Outcome persistence_round_trip() {
  Outcome o;
  testgen::Rng rng(0x5EED);
  auto dir = scratch_dir();
  int scripts = 0, events = 0;
  for (int i = 0; i < kPersistenceScripts; ++i) {
    const char* file = i % 2 == 0 ? "counter.hvx" : "bezier.hvx";
    Session s(fixture_text(file));
    int len = 1 + testgen::pick(rng, 12);
    for (int k = 0; k < len; ++k) {
      auto hs = live_handlers(s);
      if (hs.empty()) break;
      auto [attr, id] = hs[testgen::pick(rng, static_cast<int>(hs.size()))];
      Value payload;
      if (attr == "on-drag") {
        payload = Value::map({{Value::keyword("x"), Value::integer(testgen::pick(rng, 300) - 50)},
                              {Value::keyword("y"), Value::floating(testgen::pick(rng, 1000) / 8.0)}});
      } else if (attr == "on-change") {
        static const char* ratios[] = {"0.1", "0.25", "0.5", "0.8", "1", "0.333", "x"};
        payload = Value::string(ratios[testgen::pick(rng, 7)]);
      }
      s.dispatch({id, payload});
      ++events;
    }
    auto path = dir / ("script" + std::to_string(i) + ".hvx");
    write_file(path, s.text());
    Session reopened(read_text_file(path));
    if (reopened.instances().size() != s.instances().size()) o.fail(std::string(file) + ": instance count changed");
    for (const auto& inst : s.instances()) {
      auto a = s.state(inst.id);
      auto b = reopened.state(inst.id);
      if (!a || !b || !equal_with_meta(*a, *b)) {
        o.fail(std::string(file) + " script " + std::to_string(i) + ": " + inst.id + " differs after reopen");
      }
    }
    ++scripts;
  }
  std::filesystem::remove_all(dir);
  if (o.ok) {
    o.detail = std::to_string(scripts) + " scripts (" + std::to_string(events) + " events) saved, reopened, boxes equal";
  }
  return o;
}

/// The fixture with its `inputs` replaced by `inputs_text`.
inline std::string with_inputs(const std::string& text, const std::string& inputs_text) {
  std::size_t at = text.find("(def inputs");
  return text.substr(0, at) + "(def inputs " + inputs_text + ")\n\n(mapv balance inputs)\n";
}

inline Outcome red_black_oracle() {
  Outcome o;
  std::mt19937_64 rng(1234);
  std::vector<oracle::RbPtr> trees;
  for (int i = 0; i < 4; ++i) trees.push_back(oracle::rb_rotation(i));
  std::set<std::string> seen;
  while (static_cast<int>(trees.size()) < 4 + kRandomTrees) {
    auto t = oracle::gen_rb(rng, 3);
    if (seen.insert(oracle::rb_text(t)).second) trees.push_back(t);
  }
  std::string inputs = "[", expected = "[";
  for (std::size_t i = 0; i < trees.size(); ++i) {
    inputs += (i ? " " : "") + oracle::rb_text(trees[i]);
    expected += (i ? " " : "") + oracle::rb_text(oracle::balance(trees[i]));
  }
  inputs += "]";
  expected += "]";
  ProgramResult hybrid = run_program(with_inputs(fixture_text("rb-balance.hvx"), inputs));
  ProgramResult textual = run_program(with_inputs(fixture_text("rb-balance.oracle.hvx"), inputs));
  if (!hybrid.ok) o.fail("hybrid: " + std::string(hybrid.error->what()));
  if (!textual.ok) o.fail("textual: " + std::string(textual.error->what()));
  if (!o.ok) return o;
  if (!structurally_equal(hybrid.value, textual.value)) o.fail("hybrid and textual balance disagree");
  if (!structurally_equal(hybrid.value, read_one(expected))) o.fail("hybrid balance disagrees with Okasaki oracle");
  int rotated = 0;
  for (const auto& t : trees) rotated += oracle::balance(t) != t ? 1 : 0;
  if (o.ok) {
    o.detail = "4 rotations + " + std::to_string(kRandomTrees) + " random trees (" + std::to_string(rotated) +
               " rebalanced), exact structural equality";
  }
  return o;
}

inline bool points_match(const Value& v, const std::vector<oracle::Pt>& pts, double tol, std::string& why) {
  if (!v.is(Kind::vector) || v.items().size() != pts.size()) {
    why = "shape " + print_datum(v);
    return false;
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Value& p = v.items()[i];
    if (!p.is(Kind::vector) || p.items().size() != 2) {
      why = "point " + print_datum(p);
      return false;
    }
    for (int c = 0; c < 2; ++c) {
      double got = p.items()[c].as_number();
      bool ok = tol == 0 ? got == pts[i][c] : std::fabs(got - pts[i][c]) <= tol;
      if (!ok) {
        std::ostringstream os;
        os.precision(17);
        os << "point " << i << " coord " << c << ": " << got << " vs " << pts[i][c];
        why = os.str();
        return false;
      }
    }
  }
  return true;
}

inline Outcome bezier_numeric() {
  Outcome o;
  std::string text = fixture_text("bezier.hvx");
  oracle::Pt A{0, 0}, B{2, 0}, C{2, 2};
  // ratio 0.5: AB, BC, ABC exact in binary64
  oracle::Mid m = oracle::mid_points(0.5, A, B, C);
  if (m.ab != oracle::Pt{1, 0} || m.bc != oracle::Pt{2, 1} || m.abc != oracle::Pt{1.5, 0.5}) {
    o.fail("hand formula does not give (1,0) (2,1) (1.5,0.5)");
  }
  ProgramResult r = run_program(text);
  std::string why;
  if (!r.ok) {
    o.fail(r.error->what());
    return o;
  }
  if (!points_match(r.value, oracle::build_bez(0.5, A, B, C, 1), 0, why)) o.fail("ratio 0.5: " + why);
  // ratio 0.8 through the session, so the state edit goes through the text
  Session s(text);
  s.set_state("Bezier#0", {Value::keyword("ratio")}, Value::floating(0.8));
  if (s.text().find(":ratio 0.8") == std::string::npos) o.fail("ratio 0.8 not written back");
  for (int depth : {1, 2, 3}) {
    std::string prog = s.text() + "\n(build-bez [0 0] [2 0] [2 2] " + std::to_string(depth) + ")\n";
    ProgramResult r8 = run_program(prog);
    if (!r8.ok) {
      o.fail(r8.error->what());
      break;
    }
    if (!points_match(r8.value, oracle::build_bez(0.8, A, B, C, depth), kBezierTol, why)) {
      o.fail("ratio 0.8 depth " + std::to_string(depth) + ": " + why);
    }
  }
  if (o.ok) o.detail = "ratio 0.5 exact; ratio 0.8 depths 1-3 within 1e-12 of P1 + r(P2-P1)";
  return o;
}

// Hygiene: user code binds `t` around a state machine whose elaborator
// introduces its own call-record binder.
inline std::string hygiene_program(const std::string& sm_text, const std::string& user_var, bool naive) {
  std::string text = sm_text.substr(0, sm_text.find("(mapv api-protocol traces)"));
  if (naive) {
    std::size_t at = text.find("t (gensym \"t\")");
    text.replace(at, 14, "t 't");
  }
  std::string tail =
      "\n(def checked\n"
      "  (let [" + user_var + " \"T1\" u 7]\n"
      "    (let [m ^{:visx StateMachine}\n"
      "            (StateMachine {:states [{:name \"start\" :start true :accepting false}\n"
      "                                    {:name \"good\" :start false :accepting false}\n"
      "                                    {:name \"end\" :start false :accepting true}]\n"
      "                           :transitions [{:from \"start\" :to \"good\" :method :auth\n"
      "                                          :args [\"string?\"] :result \"(== " + user_var + ")\" :bind \"tok\"}\n"
      "                                         {:from \"good\" :to \"good\" :method :req\n"
      "                                          :args [\"string?\" \"(== tok)\"] :result \"any?\" :bind nil}\n"
      "                                         {:from \"good\" :to \"end\" :method :done\n"
      "                                          :args [] :result \"any?\" :bind nil}]})]\n"
      "      [" + user_var + " u (mapv m hygiene-traces)])))\n"
      "checked\n";
  return text + "\n(def hygiene-traces " + "%TRACES%" + ")\n" + tail;
}

inline Outcome hygiene() {
  Outcome o;
  std::string sm = fixture_text("state-machine.hvx");
  std::mt19937_64 rng(77);
  std::vector<std::vector<oracle::Call>> traces;
  std::string traces_text = "[";
  std::string expected = "[";
  auto add = [&](const std::vector<oracle::Call>& t) {
    traces_text += (traces.empty() ? "" : " ") + oracle::trace_text(t);
    expected += std::string(traces.empty() ? "" : " ") + (oracle::protocol_accepts(t, "T1") ? "true" : "false");
    traces.push_back(t);
  };
  add({{"auth", {std::string("ann:pw")}, std::string("T1")},
       {"req", {std::string("/a"), std::string("T1")}, std::int64_t{1}},
       {"done", {}, {}}});
  add({{"auth", {std::string("ann:pw")}, std::string("T2")}, {"done", {}, {}}});
  for (int i = 0; i < 40; ++i) add(oracle::gen_trace(rng));
  traces_text += "]";
  expected += "]";
  auto program = [&](const std::string& var, bool naive) {
    std::string p = hygiene_program(sm, var, naive);
    p.replace(p.find("%TRACES%"), 8, traces_text);
    return p;
  };
  auto result = [&](const std::string& var, bool naive) -> std::optional<Value> {
    ProgramResult r = run_program(program(var, naive));
    if (!r.ok) {
      o.fail(var + (naive ? " (naive)" : "") + ": " + r.error->what());
      return std::nullopt;
    }
    return r.value.items()[2];
  };
  auto base = result("t", false);
  auto renamed = result("user-token", false);
  auto renamed2 = result("u2", false);
  auto naive = result("t", true);
  auto naive_renamed = result("user-token", true);
  if (!o.ok) return o;
  if (!structurally_equal(*base, *renamed) || !structurally_equal(*base, *renamed2)) {
    o.fail("result changes under alpha-renaming of the user's t");
  }
  if (!structurally_equal(*base, read_one(expected))) o.fail("result disagrees with the protocol simulator");
  // control: with a literal `t` binder the user's t is captured, and renaming
  // the user's variable changes the answer
  bool control_detects = !structurally_equal(*naive, *naive_renamed);
  if (!control_detects) o.fail("negative control (literal binder) was not captured");
  if (o.ok) {
    o.detail = std::to_string(traces.size()) +
               " traces identical under renaming t -> user-token, u2; literal-binder control captured";
  }
  return o;
}

inline Outcome phase_and_crash_isolation() {
  Outcome o;
  std::string base = fixture_text("counter.hvx");
  Session s(base);
  auto check_live = [&](const std::string& stage) {
    auto renders = s.render_all();
    const RenderResult* counter = nullptr;
    for (const auto& r : renders) {
      if (r.instance == "Counter#0") counter = &r;
    }
    if (!counter || !counter->tree) {
      o.fail(stage + ": counter no longer renders");
      return;
    }
    const UiNode* b = find_tag(*counter->tree, "button");
    std::string before = print_datum(*s.state("Counter#0"));
    EditOutcome out = s.dispatch({b->attr("on-click")->handler, Value()});
    if (out.deltas.size() != 1) o.fail(stage + ": dispatch produced no delta");
    if (print_datum(*s.state("Counter#0")) == before) o.fail(stage + ": dispatch did not change state");
  };
  auto append = [&](const std::string& code) { s.apply_text_edit({s.text().size(), s.text().size()}, code); };

  // (a) a render that never finishes
  append(
      "\n(defvisx Spin (state :n 0) (render (fn [s] [:div (str (reduce (fn [a i] (reduce + a (range 1000))) 0 "
      "(range 100000)))])) (elaborate (fn [st] 0)))\n(def spin ^{:visx Spin} (Spin {}))\n");
  auto renders = s.render_all();
  bool loop_diag = false;
  for (const auto& r : renders) {
    if (r.instance == "Spin#0" && r.error && r.error->message.find("fuel exhausted") != std::string::npos) loop_diag = true;
  }
  if (!loop_diag) o.fail("looping render gave no fuel diagnostic");
  check_live("render loop");

  // (b) an elaborate that throws
  append(
      "\n(defvisx Boom (state :v 1) (render (fn [s] [:span \"boom\"])) (elaborate (fn [st] (throw \"elaborate "
      "failed\"))))\n(def boom ^{:visx Boom} (Boom {}))\n");
  ProgramResult rb = s.run();
  if (rb.ok || rb.phase != Phase::compile) o.fail("elaborate fault did not fail the compile phase");
  check_live("elaborate fault");

  // (c) a runtime exception
  std::size_t at = s.text().find("\n(def boom");
  s.apply_text_edit({at, s.text().size()}, "\n(def crash (/ 1 0))\n");
  ProgramResult rc = s.run();
  if (rc.ok || s.run_status() != RunStatus::crashed) o.fail("runtime fault did not crash the run");
  check_live("runtime fault");

  // fresh run env after all of it
  at = s.text().find("\n(def crash");
  s.apply_text_edit({at, s.text().size()}, "\n");
  s.render_all();
  s.start_run();
  while (!s.step_run()) {
  }
  if (!s.last_run() || !s.last_run()->ok) {
    o.fail("clean run failed");
    return o;
  }
  audit_run_world(s.active_run()->world(), s.edit_world(), s.text(), o);
  if (o.ok) o.detail = "render loop, elaborate throw, runtime crash survived; run env has 0 edit-phase bindings";
  return o;
}

inline Outcome meta_extension() {
  Outcome o;
  std::string text = fixture_text("form-builder.hvx");
  std::set<std::string> in_source;
  std::regex defvisx(R"(\(defvisx\s+([A-Za-z][\w-]*))");
  for (std::sregex_iterator it(text.begin(), text.end(), defvisx), end; it != end; ++it) in_source.insert((*it)[1]);
  Session s(text);
  auto h = find_handler(s, "FormBuilder#0", "on-submit");
  if (!h) {
    o.fail("form builder has no add-field control");
    return o;
  }
  s.dispatch({*h, Value::string("comment")});
  std::shared_ptr<const VisxDef> grade;
  for (const auto& d : s.edit_world().registry().all()) {
    if (!in_source.count(d->short_name.str())) grade = d;
  }
  if (!grade) {
    o.fail("no generated definition in the registry");
    return o;
  }
  bool has_field = false;
  for (const auto& [k, v] : grade->schema) has_field |= print_datum(k) == ":comment";
  if (!has_field) o.fail(grade->short_name.str() + " schema lacks :comment");
  ProgramResult r = s.run();
  if (!r.ok) {
    o.fail(r.error->what());
    return o;
  }
  if (!r.value.is(Kind::map) || !r.value.find(Value::keyword("comment"))) {
    o.fail("instance elaborates to " + print_datum(r.value));
  }
  if (o.ok) o.detail = grade->short_name.str() + " generated (not in source), instance elaborates to " + print_datum(r.value);
  return o;
}

inline Outcome state_machine_compile_check() {
  Outcome o;
  std::string text = fixture_text("state-machine.hvx");
  std::size_t at = text.find(":args [\"string?\"] :result \"string?\" :bind \"t\"");
  text.replace(at, 17, ":args [\"(== t)\"]");
  std::size_t inst = text.find("^{:visx StateMachine}");
  ProgramResult r = run_program(text);
  if (r.ok) {
    o.fail("compiled without error");
    return o;
  }
  if (r.phase != Phase::compile) o.fail("failed in phase " + std::string(phase_name(r.phase)));
  if (std::string(r.error->what()).find("unbound symbol: t") == std::string::npos) o.fail(r.error->what());
  if (!r.error->span() || r.error->span()->start != inst) o.fail("error span is not the instance span");
  // the same through a session: the run fails before any run-phase step
  Session s(text);
  ProgramResult sr = s.run();
  if (sr.ok || sr.phase != Phase::compile || sr.steps != 0) o.fail("session run did not fail at compile time");
  if (o.ok) {
    auto [line, col] = line_col(text, inst);
    o.detail = "unbound symbol: t at the instance (" + std::to_string(line) + ":" + std::to_string(col) + ")";
  }
  return o;
}

inline Outcome fuel_and_stop() {
  Outcome o;
  const std::string loop = "(reduce (fn [a i] (reduce + a (range 100000))) 0 (range 100000))";
  // stop arrives from another thread while a quantum is executing
  std::uint64_t worst = 0;
  for (int trial = 0; trial < 5; ++trial) {
    RunOptions opts;
    opts.quantum = kQuantum;
    RunTask task(compile_program(loop), opts);
    std::thread driver([&] { task.finish(); });
    std::this_thread::sleep_for(std::chrono::milliseconds(20 + 10 * trial));
    std::uint64_t at_request = task.steps();
    task.stop();
    driver.join();
    const ProgramResult& r = task.result();
    if (r.ok || r.error->kind() != ErrorKind::stopped) o.fail("run was not stopped");
    std::uint64_t extra = r.steps - at_request;
    worst = std::max(worst, extra);
    if (extra > kQuantum) o.fail("ran " + std::to_string(extra) + " steps after the stop request");
  }
  // session level: stop between quanta
  Session s(loop);
  s.start_run();
  s.step_run();
  std::uint64_t at_request = s.active_run()->steps();
  s.stop_run();
  if (s.run_status() != RunStatus::stopped || s.last_run()->steps - at_request > kQuantum) o.fail("session stop late");
  // looping render
  Session r(fixture_text("counter.hvx") +
            "\n(defvisx Spin (state :n 0) (render (fn [s] [:div (str (reduce (fn [a i] (reduce + a (range 1000))) 0 "
            "(range 100000)))])) (elaborate (fn [st] 0)))\n(def spin ^{:visx Spin} (Spin {}))\n");
  bool diag = false, counter_ok = false;
  for (const auto& x : r.render_all()) {
    if (x.instance == "Spin#0" && x.error && x.error->instance == "Spin#0" &&
        x.error->message.find("fuel exhausted") != std::string::npos) {
      diag = true;
    }
    if (x.instance == "Counter#0" && x.tree) counter_ok = true;
  }
  if (!diag) o.fail("looping render gave no per-instance fuel diagnostic");
  if (!counter_ok || r.run_status() != RunStatus::idle) o.fail("session not live after looping render");
  auto h = find_handler(r, "Counter#0", "on-click");
  if (!h || r.dispatch({*h, Value()}).deltas.size() != 1) o.fail("session did not answer dispatch");
  if (o.ok) {
    o.detail = "worst overrun " + std::to_string(worst) + " steps (quantum " + std::to_string(kQuantum) +
               "); looping render diagnosed per instance";
  }
  return o;
}

struct Criterion {
  const char* name;
  std::function<Outcome()> check;
};

inline std::vector<Criterion> all() {
  return {
      {"counter-end-to-end", counter_end_to_end},
      {"backwards-compatibility", backwards_compatibility},
      {"persistence-round-trip", persistence_round_trip},
      {"red-black-oracle", red_black_oracle},
      {"bezier-numeric", bezier_numeric},
      {"hygiene", hygiene},
      {"phase-and-crash-isolation", phase_and_crash_isolation},
      {"meta-extension", meta_extension},
      {"state-machine-compile-check", state_machine_compile_check},
      {"fuel-and-stop", fuel_and_stop},
  };
}

}  // namespace hvx::criteria
