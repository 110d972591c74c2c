#pragma once

// Hand-rolled generators for property tests. Every generator takes the rng
// explicitly so a failing seed reproduces.

#include <random>
#include <string>
#include <vector>

#include "hvx/reader.hpp"
#include "hvx/session.hpp"
#include "hvx/value.hpp"

namespace hvx::testgen {

using Rng = std::mt19937_64;

inline int pick(Rng& rng, int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }
inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

inline std::string gen_text(Rng& rng) {
  static const std::vector<std::string> parts = {"a", "b", "z", " ", "\"", "\\", "\n", "\t", "é", "→", ":", ";", "(", "]", "0"};
  std::string s;
  int n = pick(rng, 6);
  for (int i = 0; i < n; ++i) s += parts[pick(rng, static_cast<int>(parts.size()))];
  return s;
}

inline Value gen_symbol(Rng& rng) {
  static const std::vector<std::string> names = {"x", "foo", "+", "->", "sm-accepts?", "swap!", "user/answer",
                                                 "g/let", "t#12", "a.b", "<=", "ns.inner/sym"};
  return Value::symbol(names[pick(rng, static_cast<int>(names.size()))]);
}

inline Value gen_keyword(Rng& rng) {
  static const std::vector<std::string> names = {"count", "visx", "ratio", "a", "nodes", "ns/k", "on-click", "x?"};
  return Value::keyword(names[pick(rng, static_cast<int>(names.size()))]);
}

inline Value gen_scalar(Rng& rng) {
  switch (pick(rng, 9)) {
    case 0: return Value();
    case 1: return Value::boolean(coin(rng));
    case 2: return Value::integer(std::uniform_int_distribution<std::int64_t>(-1000, 1000)(rng));
    case 3: {
      static const std::int64_t edge[] = {0, -1, INT64_MAX, INT64_MIN + 1, 42};
      return Value::integer(edge[pick(rng, 5)]);
    }
    case 4: {
      static const double edge[] = {0.5, -2.25, 1e-7, 6.02e23, 0.1, 1.0 / 3.0, -0.0, 1e300};
      if (coin(rng)) return Value::floating(edge[pick(rng, 8)]);
      return Value::floating(std::uniform_real_distribution<double>(-1e6, 1e6)(rng));
    }
    case 5:
    case 6: return Value::string(gen_text(rng));
    case 7: return gen_keyword(rng);
    default: return gen_symbol(rng);
  }
}

inline Value gen_meta(Rng& rng) {
  MapEntries m;
  m.emplace_back(Value::keyword("visx"), gen_symbol(rng));
  if (coin(rng)) m.emplace_back(gen_keyword(rng), gen_scalar(rng));
  return Value::map(std::move(m));
}

/// Random reader datum: anything print_datum must round-trip.
inline Value gen_datum(Rng& rng, int depth) {
  Value v;
  int k = depth <= 0 ? 0 : pick(rng, 5);
  if (k <= 1) {
    v = gen_scalar(rng);
  } else {
    Vec items;
    int n = pick(rng, 4);
    if (k == 2) {
      for (int i = 0; i < n; ++i) items.push_back(gen_datum(rng, depth - 1));
      v = Value::list(std::move(items));
    } else if (k == 3) {
      for (int i = 0; i < n; ++i) items.push_back(gen_datum(rng, depth - 1));
      v = Value::vector(std::move(items));
    } else {
      MapEntries m;
      for (int i = 0; i < n; ++i) {
        Value key = coin(rng) ? gen_keyword(rng) : gen_datum(rng, depth - 1);
        m.emplace_back(key, gen_datum(rng, depth - 1));
      }
      v = Value::map(std::move(m));
    }
  }
  bool meta_ok = v.is(Kind::symbol) || v.is(Kind::list) || v.is(Kind::vector) || v.is(Kind::map);
  if (meta_ok && coin(rng, 0.2)) v = v.with_meta(gen_meta(rng));
  return v;
}

/// Random plain data as JSON carries it: no symbols, lists or metadata.
inline Value gen_wire_datum(Rng& rng, int depth) {
  int k = depth <= 0 ? pick(rng, 2) : pick(rng, 4);
  if (k <= 1) {
    switch (pick(rng, 7)) {
      case 0: return Value();
      case 1: return Value::boolean(coin(rng));
      case 2: return Value::integer(std::uniform_int_distribution<std::int64_t>(INT64_MIN, INT64_MAX)(rng));
      case 3: return Value::floating(std::uniform_real_distribution<double>(-1e9, 1e9)(rng) + 0.5);
      case 4: return gen_keyword(rng);
      default: {
        static const std::vector<std::string> tricky = {":looks-like-kw", "\\back", "plain", "", ":", "\\:both"};
        return Value::string(coin(rng) ? tricky[pick(rng, 6)] : gen_text(rng));
      }
    }
  }
  int n = pick(rng, 4);
  if (k == 2) {
    Vec items;
    for (int i = 0; i < n; ++i) items.push_back(gen_wire_datum(rng, depth - 1));
    return Value::vector(std::move(items));
  }
  MapEntries m;
  for (int i = 0; i < n; ++i) {
    Value key = coin(rng) ? gen_keyword(rng) : Value::string(gen_text(rng));
    m.emplace_back(key, gen_wire_datum(rng, depth - 1));
  }
  return Value::map(std::move(m));
}

inline UiNode gen_ui(Rng& rng, int depth) {
  UiNode node;
  if (depth <= 0 || coin(rng, 0.25)) {
    if (coin(rng, 0.4)) {
      node.type = UiNode::Type::text;
      node.text = gen_text(rng);
      return node;
    }
  }
  static const std::vector<std::string> tags = {"div", "button", "text-input", "svg-group", "circle", "code-editor", "span"};
  node.tag = tags[pick(rng, static_cast<int>(tags.size()))];
  static const std::vector<std::string> keys = {"class", "on-click", "value", "path", "style", "cx", "on-change"};
  for (const auto& key : keys) {
    if (!coin(rng, 0.35)) continue;
    UiAttr a;
    if (key.rfind("on-", 0) == 0) {
      a.type = UiAttr::Type::handler;
      a.handler = "h:" + std::to_string(pick(rng, 1000));
    } else if (key == "path") {
      a.type = UiAttr::Type::path;
      for (int i = pick(rng, 3); i >= 0; --i) {
        a.path.push_back(coin(rng) ? gen_keyword(rng) : Value::integer(pick(rng, 9)));
      }
    } else if (key == "style") {
      a.data = Value::map({{Value::keyword("color"), Value::string("red")}, {Value::keyword("width"), Value::integer(3)}});
    } else {
      a.data = gen_wire_datum(rng, 0);
    }
    node.attrs.emplace_back(key, std::move(a));
  }
  if (depth > 0) {
    for (int i = pick(rng, 4); i > 0; --i) node.children.push_back(gen_ui(rng, depth - 1));
  }
  return node;
}

inline bool ui_equal(const UiNode& a, const UiNode& b) {
  if (a.type != b.type || a.tag != b.tag || a.text != b.text) return false;
  if (a.attrs.size() != b.attrs.size() || a.children.size() != b.children.size()) return false;
  for (std::size_t i = 0; i < a.attrs.size(); ++i) {
    const auto& [ka, x] = a.attrs[i];
    const auto& [kb, y] = b.attrs[i];
    if (ka != kb || x.type != y.type) return false;
    switch (x.type) {
      case UiAttr::Type::handler:
        if (x.handler != y.handler) return false;
        break;
      case UiAttr::Type::path:
        if (!structurally_equal(Value::vector(x.path), Value::vector(y.path))) return false;
        break;
      case UiAttr::Type::data:
        if (!structurally_equal(x.data, y.data)) return false;
        break;
    }
  }
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!ui_equal(a.children[i], b.children[i])) return false;
  }
  return true;
}

/// Preorder walk collecting every element carrying a handler attribute.
inline void collect_handlers(const UiNode& n, std::vector<std::pair<std::string, std::string>>& out) {
  for (const auto& [k, a] : n.attrs) {
    if (a.type == UiAttr::Type::handler) out.emplace_back(k, a.handler);
  }
  for (const auto& c : n.children) collect_handlers(c, out);
}

}  // namespace hvx::testgen
