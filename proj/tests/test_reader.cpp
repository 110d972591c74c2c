#include <gtest/gtest.h>

#include <cmath>

#include "hvx/corpus.hpp"
#include "hvx/error.hpp"
#include "hvx/reader.hpp"
#include "support/gen.hpp"

using namespace hvx;

namespace {

std::string fixture(const char* name) { return read_text_file(default_corpus_dir() / name); }

Error read_error(std::string_view text) {
  try {
    read_all(text);
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "no read error for: " << text;
  return Error(ErrorKind::read, "none");
}

// every nested form with a span, preorder
void walk(const Value& v, std::vector<Value>& out) {
  if (v.span()) out.push_back(v);
  if (v.is(Kind::list) || v.is(Kind::vector)) {
    for (const auto& x : v.items()) walk(x, out);
  } else if (v.is(Kind::map)) {
    for (const auto& [k, x] : v.entries()) {
      walk(k, out);
      walk(x, out);
    }
  }
}

}  // namespace

TEST(Reader, MinimalList) {
  auto forms = read_all("(+ 1 2)");
  ASSERT_EQ(forms.size(), 1u);
  const Value& f = forms[0];
  ASSERT_TRUE(f.is(Kind::list));
  ASSERT_EQ(f.items().size(), 3u);
  EXPECT_EQ(f.items()[0].as_name().str(), "+");
  EXPECT_EQ(f.items()[1].as_int(), 1);
  EXPECT_EQ(f.items()[2].as_int(), 2);
  EXPECT_EQ(f.span(), (SourceSpan{0, 7}));
  EXPECT_EQ(f.items()[2].span(), (SourceSpan{5, 6}));
}

TEST(Reader, InstanceMetadata) {
  Value f = read_one("^{:visx Counter} (Counter {:count 42})");
  ASSERT_TRUE(f.is(Kind::list));
  const Value* tag = f.meta().find(Value::keyword("visx"));
  ASSERT_NE(tag, nullptr);
  EXPECT_EQ(tag->as_name().str(), "Counter");
  EXPECT_EQ(f.items()[1].find(Value::keyword("count"))->as_int(), 42);
  // the span of a tagged form covers its metadata
  EXPECT_EQ(f.span()->start, 0u);
}

TEST(Reader, ShorthandsAndComments) {
  auto forms = read_all("; note\n@box 'x ^:visx (Foo) ; trailing\n");
  ASSERT_EQ(forms.size(), 3u);
  EXPECT_EQ(print_datum(forms[0]), "(deref box)");
  EXPECT_EQ(print_datum(forms[1]), "(quote x)");
  EXPECT_TRUE(structurally_equal(forms[2].meta(), read_one("{:visx true}")));
}

TEST(Reader, OddMapReportsClosingBrace) {
  Error e = read_error("{:a 1 :b}");
  EXPECT_EQ(e.kind(), ErrorKind::read);
  EXPECT_NE(std::string(e.what()).find("odd map entry count"), std::string::npos);
  ASSERT_TRUE(e.span());
  EXPECT_EQ(e.span()->start, 8u);
}

TEST(Reader, ErrorOffsets) {
  EXPECT_EQ(read_error("(a (b)").span()->start, 0u);
  EXPECT_EQ(read_error("(a))").span()->start, 3u);
  EXPECT_EQ(read_error("x \"abc").span()->start, 2u);
  EXPECT_EQ(read_error("(f ^{:a 1})").span()->start, 3u);
  EXPECT_NE(std::string(read_error("99999999999999999999").what()).find("out of range"), std::string::npos);
  EXPECT_NE(std::string(read_error("#{1 2}").what()).size(), 0u);
}

TEST(Reader, PrintCanonical) {
  EXPECT_EQ(print_datum(read_one("(+   1\n 2)")), "(+ 1 2)");
  EXPECT_EQ(print_datum(read_one(":visx")), ":visx");
  EXPECT_EQ(print_datum(Value::map({{Value::keyword("count"), Value::integer(43)}})), "{:count 43}");
  EXPECT_TRUE(structurally_equal(read_one("{:count 43}"), Value::map({{Value::keyword("count"), Value::integer(43)}})));
  EXPECT_EQ(print_datum(read_one("\"a\\\"b\\\\c\"")), "\"a\\\"b\\\\c\"");
  EXPECT_EQ(print_datum(read_one("1.0")), "1.0");
  EXPECT_TRUE(read_one("1").is(Kind::integer));
  EXPECT_TRUE(read_one("1.0").is(Kind::floating));
}

TEST(ReaderProperty, PrintReadRoundTrip) {
  testgen::Rng rng(0xC0FFEE);
  for (int i = 0; i < 2000; ++i) {
    Value d = testgen::gen_datum(rng, 4);
    std::string text = print_datum(d);
    Value back;
    ASSERT_NO_THROW(back = read_one(text)) << text;
    ASSERT_TRUE(equal_with_meta(d, back)) << text << "\n  reread as " << print_datum(back);
    ASSERT_EQ(print_datum(back), text);
  }
}

TEST(Reader, SpliceCounterChangesOnlyStateBytes) {
  Document doc(fixture("counter.hvx"));
  const std::string& old = doc.text();
  std::size_t at = old.find("{:count 42}");
  ASSERT_NE(at, std::string::npos);
  Document next = doc.splice({at, at + 11}, "{:count 43}");
  ASSERT_EQ(next.text().size(), old.size());
  for (std::size_t i = 0; i < old.size(); ++i) {
    if (i >= at && i < at + 11) continue;
    ASSERT_EQ(old[i], next.text()[i]) << "byte " << i;
  }
  EXPECT_EQ(next.text().substr(at, 11), "{:count 43}");
}

TEST(Reader, SpliceErrors) {
  Document doc("(a b) (c)");
  try {
    doc.splice({1, 2}, "");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()), "replacement parses to zero forms");
  }
  EXPECT_THROW(doc.splice({1, 2}, "x y"), Error);
  EXPECT_THROW(doc.splice({1, 2}, "(x"), Error);
  EXPECT_THROW(doc.splice({0, 2}, "x"), Error);   // not a form boundary
  EXPECT_THROW(doc.splice({0, 99}, "x"), Error);  // out of range
}

TEST(Reader, SpliceBezierRatio) {
  Document doc(fixture("bezier.hvx"));
  std::size_t at = doc.text().find(":ratio 0.5})");
  ASSERT_NE(at, std::string::npos);
  std::size_t num = at + 7;
  Document next = doc.splice({num, num + 3}, "0.8");
  // the Bezier instance inside build-bez now carries ratio 0.8
  auto located = next.locate(num);
  ASSERT_TRUE(located);
  EXPECT_EQ(located->as_float(), 0.8);
  EXPECT_EQ(next.forms().size(), doc.forms().size());
}

TEST(Reader, LocateExamples) {
  std::string text = fixture("counter.hvx");
  Document doc(text);
  std::size_t at = text.find("42");
  auto v = doc.locate(at + 1);
  ASSERT_TRUE(v);
  EXPECT_TRUE(v->is(Kind::integer));
  EXPECT_EQ(v->as_int(), 42);
  EXPECT_FALSE(doc.locate(3));  // inside the leading comment
  std::size_t paren = text.find("(def answer");
  auto list = doc.locate(paren);
  ASSERT_TRUE(list);
  EXPECT_EQ(list->span()->start, paren);
}

TEST(Reader, LocateSweepMatchesSpans) {
  // brute force: the innermost form containing each offset is the spanned
  // form of smallest size containing it
  for (const char* name : {"counter.hvx", "tsuro.hvx", "bezier.hvx"}) {
    Document doc(fixture(name));
    std::vector<Value> all;
    for (const auto& f : doc.forms()) walk(f, all);
    for (std::size_t off = 0; off < doc.text().size(); ++off) {
      std::optional<SourceSpan> best;
      for (const auto& v : all) {
        SourceSpan s = *v.span();
        if (s.contains(off) && (!best || s.size() < best->size())) best = s;
      }
      auto got = doc.locate(off);
      ASSERT_EQ(got.has_value(), best.has_value()) << name << " offset " << off;
      if (got) ASSERT_EQ(*got->span(), *best) << name << " offset " << off;
    }
  }
}

TEST(ReaderProperty, SpliceLocalityAndStability) {
  testgen::Rng rng(42);
  Document doc(fixture("state-machine.hvx"));
  for (int round = 0; round < 150; ++round) {
    std::vector<Value> all;
    for (const auto& f : doc.forms()) walk(f, all);
    const Value& target = all[testgen::pick(rng, static_cast<int>(all.size()))];
    SourceSpan s = *target.span();
    std::string repl = print_datum(testgen::gen_datum(rng, 2));
    Document next = doc.splice(s, repl);
    const std::string& a = doc.text();
    const std::string& b = next.text();
    ASSERT_EQ(a.substr(0, s.start), b.substr(0, s.start));
    ASSERT_EQ(a.substr(s.end), b.substr(s.start + repl.size()));
    ASSERT_EQ(b.substr(s.start, repl.size()), repl);
    // reparsing the text reproduces the document's forms
    auto reread = read_all(b);
    ASSERT_EQ(reread.size(), next.forms().size());
    for (std::size_t i = 0; i < reread.size(); ++i) {
      ASSERT_TRUE(equal_with_meta(reread[i], next.forms()[i]));
      ASSERT_EQ(reread[i].span(), next.forms()[i].span());
    }
    doc = next;
  }
}

TEST(Reader, TopLevelSpansDisjointAndOrdered) {
  for (const char* name : {"counter.hvx", "bezier.hvx", "tsuro.hvx", "rb-balance.hvx", "state-machine.hvx",
                           "form-builder.hvx", "color-picker.hvx"}) {
    Document doc(fixture(name));
    std::size_t prev = 0;
    for (const auto& f : doc.forms()) {
      ASSERT_TRUE(f.span());
      EXPECT_GE(f.span()->start, prev) << name;
      EXPECT_LE(f.span()->end, doc.text().size());
      prev = f.span()->end;
    }
  }
}

TEST(Reader, CrlfPreserved) {
  Document doc("(a 1)\r\n(b {:k 2})\r\n");
  ASSERT_EQ(doc.forms().size(), 2u);
  std::size_t at = doc.text().find("2");
  Document next = doc.splice({at, at + 1}, "3");
  EXPECT_EQ(next.text(), "(a 1)\r\n(b {:k 3})\r\n");
}

TEST(Reader, LineCol) {
  EXPECT_EQ(line_col("ab\ncd", 0), (std::pair<std::size_t, std::size_t>{1, 1}));
  EXPECT_EQ(line_col("ab\ncd", 4), (std::pair<std::size_t, std::size_t>{2, 2}));
}
