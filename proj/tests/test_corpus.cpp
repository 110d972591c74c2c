#include <gtest/gtest.h>

#include "support/criteria.hpp"

using namespace hvx;
using criteria::fixture_text;
using criteria::run_cli;

class Fixture : public ::testing::TestWithParam<std::string> {};

TEST_P(Fixture, PassesHarness) {
  auto specs = load_manifest(default_corpus_dir());
  FixtureReport rep = fixture_check(find_fixture(specs, GetParam()));
  std::string diffs;
  for (const auto& d : rep.diffs) diffs += "\n  " + d;
  EXPECT_TRUE(rep.passed) << diffs;
}

INSTANTIATE_TEST_SUITE_P(Corpus, Fixture,
                         ::testing::Values("counter", "bezier", "tsuro", "rb-balance", "state-machine", "form-builder",
                                           "color-picker"));

TEST(Corpus, TsuroIsASymmetricTable) {
  ProgramResult r = run_program(fixture_text("tsuro.hvx"));
  ASSERT_TRUE(r.ok);
  EXPECT_TRUE(oracle::tsuro_symmetric(r.value)) << print_datum(r.value);
  // connecting C and D through two clicks adds the C<->D pair
  Session s(fixture_text("tsuro.hvx"));
  auto c = find_handler(s, "Tile#0", "on-click", 2);
  s.dispatch({*c, Value()});
  auto d = find_handler(s, "Tile#0", "on-click", 3);
  s.dispatch({*d, Value()});
  ProgramResult after = s.run();
  ASSERT_TRUE(after.ok);
  EXPECT_TRUE(oracle::tsuro_symmetric(after.value)) << print_datum(after.value);
  EXPECT_EQ(print_datum(*after.value.find(Value::keyword("C"))), ":D");
  EXPECT_EQ(print_datum(*after.value.find(Value::keyword("D"))), ":C");
}

TEST(CorpusProperty, StateMachineAgreesWithSimulator) {
  std::mt19937_64 rng(31337);
  std::string text = fixture_text("state-machine.hvx");
  std::string head = text.substr(0, text.find("(def traces"));
  std::string traces = "[", expected = "[";
  for (int i = 0; i < 300; ++i) {
    auto t = oracle::gen_trace(rng);
    traces += (i ? " " : "") + oracle::trace_text(t);
    expected += std::string(i ? " " : "") + (oracle::protocol_accepts(t) ? "true" : "false");
  }
  ProgramResult r = run_program(head + "(mapv api-protocol " + traces + "])");
  ASSERT_TRUE(r.ok) << r.error->what();
  EXPECT_TRUE(structurally_equal(r.value, read_one(expected + "]")));
}

TEST(CorpusProperty, RedBlackAgreesWithOkasaki) {
  std::mt19937_64 rng(8);
  std::string inputs = "[", expected = "[";
  for (int i = 0; i < 300; ++i) {
    auto t = oracle::gen_rb(rng, 3);
    inputs += (i ? " " : "") + oracle::rb_text(t);
    expected += (i ? " " : "") + oracle::rb_text(oracle::balance(t));
  }
  ProgramResult r = run_program(criteria::with_inputs(fixture_text("rb-balance.hvx"), inputs + "]"));
  ASSERT_TRUE(r.ok) << r.error->what();
  EXPECT_TRUE(structurally_equal(r.value, read_one(expected + "]")));
}

TEST(CorpusProperty, BezierAgreesWithHandFormula) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(-50, 50), ratio(0, 1);
  std::string bez = fixture_text("bezier.hvx");
  std::size_t at = bez.find(":ratio 0.5}");
  for (int i = 0; i < 25; ++i) {
    double r = ratio(rng);
    oracle::Pt a{coord(rng), coord(rng)}, b{coord(rng), coord(rng)}, c{coord(rng), coord(rng)};
    std::string text = bez;
    text.replace(at + 7, 3, print_datum(Value::floating(r)));
    auto pt = [](oracle::Pt p) { return "[" + print_datum(Value::floating(p[0])) + " " + print_datum(Value::floating(p[1])) + "]"; };
    text += "\n(build-bez " + pt(a) + " " + pt(b) + " " + pt(c) + " 2)\n";
    ProgramResult res = run_program(text);
    ASSERT_TRUE(res.ok) << res.error->what();
    std::string why;
    EXPECT_TRUE(criteria::points_match(res.value, oracle::build_bez(r, a, b, c, 2), criteria::kBezierTol, why)) << why;
  }
}

TEST(Cli, RunPrintsValue) {
  auto dir = criteria::scratch_dir();
  criteria::write_file(dir / "plain.hvx", "(+ 1 2)\n");
  EXPECT_EQ(run_cli("run " + (dir / "plain.hvx").string()).out, "3\n");
  criteria::write_file(dir / "out.hvx", "(println \"hi\") (* 6 7)\n");
  EXPECT_EQ(run_cli("run " + (dir / "out.hvx").string()).out, "hi\n42\n");
  criteria::write_file(dir / "nope.hvx", "(def x 1)\n^{:visx Nope} (Nope {:a 1})\n");
  auto bad = run_cli("run " + (dir / "nope.hvx").string(), true);
  EXPECT_EQ(bad.status, 1);
  EXPECT_NE(bad.out.find("Nope"), std::string::npos) << bad.out;
  EXPECT_NE(bad.out.find("nope.hvx:2:"), std::string::npos) << bad.out;
  EXPECT_EQ(run_cli("run " + (dir / "missing.hvx").string()).status, 2);
  auto js = run_cli("run --json " + (dir / "plain.hvx").string());
  EXPECT_EQ(Json::parse(js.out)["value"], "3");
  std::filesystem::remove_all(dir);
}

TEST(Cli, FuelFlag) {
  auto dir = criteria::scratch_dir();
  criteria::write_file(dir / "loop.hvx", "(reduce + (range 100000))\n");
  auto r = run_cli("run --fuel 1000 " + (dir / "loop.hvx").string(), true);
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.out.find("fuel"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(Cli, Expand) {
  auto bez = run_cli("expand " + (default_corpus_dir() / "bezier.hvx").string());
  EXPECT_EQ(bez.status, 0);
  EXPECT_NE(bez.out.find("{:keys [AB BC ABC]}"), std::string::npos);
  EXPECT_NE(bez.out.find("compute-mid-points"), std::string::npos);
  auto fb = run_cli("expand " + (default_corpus_dir() / "form-builder.hvx").string());
  EXPECT_NE(fb.out.find("(defvisx Grade"), std::string::npos);
  auto dir = criteria::scratch_dir();
  criteria::write_file(dir / "plain.hvx", "(def   x [1   2])\n(if x   :a :b)\n");
  EXPECT_EQ(run_cli("expand " + (dir / "plain.hvx").string()).out, "(def x [1 2])\n(if x :a :b)\n");
  std::filesystem::remove_all(dir);
}

TEST(Cli, ServeStdio) {
  auto dir = criteria::scratch_dir();
  criteria::write_file(dir / "in.ndjson",
                       "{\"jsonrpc\":\"2.0\",\"id\":1,\"method\":\"session/open\",\"params\":{\"path\":\"" +
                           (default_corpus_dir() / "counter.hvx").string() +
                           "\"}}\n"
                           "{\"jsonrpc\":\"2.0\",\"id\":2,\"method\":\"session/run\",\"params\":{\"session\":\"s1\",\"wait\":true}}\n"
                           "{\"jsonrpc\":\"2.0\",\"id\":3,\"method\":\"shutdown\"}\n");
  auto r = run_cli("serve --stdio < " + (dir / "in.ndjson").string());
  EXPECT_EQ(r.status, 0);
  std::istringstream lines(r.out);
  std::string line;
  bool done = false;
  while (std::getline(lines, line)) {
    Json j = Json::parse(line);
    if (j.value("method", "") == "runDone") done = j["params"]["value"] == "42";
  }
  EXPECT_TRUE(done) << r.out;
  std::filesystem::remove_all(dir);
}

TEST(Cli, Check) {
  auto r = run_cli("check counter tsuro");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("PASS counter"), std::string::npos);
  EXPECT_NE(r.out.find("PASS tsuro"), std::string::npos);
}
