#include "hvx/wire.hpp"

#include <cmath>

namespace hvx {

namespace {

std::string encode_string(const std::string& s) {
  if (!s.empty() && (s[0] == ':' || s[0] == '\\')) return "\\" + s;
  return s;
}

Value decode_string(const std::string& s) {
  if (!s.empty() && s[0] == ':' && s.size() > 1) return Value::keyword(std::string_view(s).substr(1));
  if (!s.empty() && s[0] == '\\') return Value::string(s.substr(1));
  return Value::string(s);
}

std::string encode_key(const Value& k) {
  switch (k.kind()) {
    case Kind::keyword: return ":" + k.as_name().str();
    case Kind::string: return encode_string(k.as_string());
    default: return print_datum(k);
  }
}

}  // namespace

Json datum_to_json(const Value& v) {
  switch (v.kind()) {
    case Kind::nil: return nullptr;
    case Kind::boolean: return v.as_bool();
    case Kind::integer: return v.as_int();
    case Kind::floating: {
      double d = v.as_float();
      if (std::isfinite(d)) return d;
      return print_datum(v);
    }
    case Kind::string: return encode_string(v.as_string());
    case Kind::keyword: return ":" + v.as_name().str();
    case Kind::symbol: return v.as_name().str();
    case Kind::list:
    case Kind::vector: {
      Json arr = Json::array();
      for (const auto& x : v.items()) arr.push_back(datum_to_json(x));
      return arr;
    }
    case Kind::map: {
      Json obj = Json::object();
      for (const auto& [k, x] : v.entries()) obj[encode_key(k)] = datum_to_json(x);
      return obj;
    }
    default: return print_datum(v);
  }
}

Value json_to_datum(const Json& j) {
  switch (j.type()) {
    case Json::value_t::null: return Value();
    case Json::value_t::boolean: return Value::boolean(j.get<bool>());
    case Json::value_t::number_integer: return Value::integer(j.get<std::int64_t>());
    case Json::value_t::number_unsigned: {
      auto u = j.get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(INT64_MAX)) return Value::floating(static_cast<double>(u));
      return Value::integer(static_cast<std::int64_t>(u));
    }
    case Json::value_t::number_float: return Value::floating(j.get<double>());
    case Json::value_t::string: return decode_string(j.get<std::string>());
    case Json::value_t::array: {
      Vec items;
      for (const auto& x : j) items.push_back(json_to_datum(x));
      return Value::vector(std::move(items));
    }
    case Json::value_t::object: {
      MapEntries entries;
      for (const auto& [k, x] : j.items()) entries.emplace_back(decode_string(k), json_to_datum(x));
      return Value::map(std::move(entries));
    }
    default: throw Error(ErrorKind::session, "unsupported JSON value");
  }
}

Json span_to_json(const SourceSpan& span) { return {{"start", span.start}, {"end", span.end}}; }

SourceSpan json_to_span(const Json& j) {
  if (!j.is_object() || !j.contains("start") || !j.contains("end") || !j["start"].is_number_unsigned() ||
      !j["end"].is_number_unsigned()) {
    throw Error(ErrorKind::session, "span must be {\"start\": n, \"end\": m} with non-negative offsets");
  }
  return SourceSpan{j["start"].get<std::size_t>(), j["end"].get<std::size_t>()};
}

Json ui_to_json(const UiNode& node) {
  if (node.type == UiNode::Type::text) return {{"text", node.text}};
  Json attrs = Json::object();
  for (const auto& [k, a] : node.attrs) {
    switch (a.type) {
      case UiAttr::Type::handler: attrs[k] = {{"handler", a.handler}}; break;
      case UiAttr::Type::path: attrs[k] = {{"path", datum_to_json(Value::vector(a.path))}}; break;
      case UiAttr::Type::data: attrs[k] = datum_to_json(a.data); break;
    }
  }
  Json children = Json::array();
  for (const auto& c : node.children) children.push_back(ui_to_json(c));
  return {{"tag", node.tag}, {"attrs", attrs}, {"children", children}};
}

UiNode json_to_ui(const Json& j) {
  auto bad = [] { return Error(ErrorKind::session, "malformed UI node"); };
  if (!j.is_object()) throw bad();
  UiNode node;
  if (j.contains("text")) {
    if (!j["text"].is_string()) throw bad();
    node.type = UiNode::Type::text;
    node.text = j["text"].get<std::string>();
    return node;
  }
  if (!j.contains("tag") || !j["tag"].is_string()) throw bad();
  node.tag = j["tag"].get<std::string>();
  if (j.contains("attrs")) {
    if (!j["attrs"].is_object()) throw bad();
    for (const auto& [k, v] : j["attrs"].items()) {
      UiAttr a;
      if (v.is_object() && v.size() == 1 && v.contains("handler") && v["handler"].is_string()) {
        a.type = UiAttr::Type::handler;
        a.handler = v["handler"].get<std::string>();
      } else if (v.is_object() && v.size() == 1 && v.contains("path") && v["path"].is_array()) {
        a.type = UiAttr::Type::path;
        a.path = json_to_datum(v["path"]).items();
      } else {
        a.data = json_to_datum(v);
      }
      node.attrs.emplace_back(k, std::move(a));
    }
  }
  if (j.contains("children")) {
    if (!j["children"].is_array()) throw bad();
    for (const auto& c : j["children"]) node.children.push_back(json_to_ui(c));
  }
  return node;
}

Json diagnostic_to_json(const Diagnostic& d) {
  Json j = {{"phase", std::string(phase_name(d.phase))}, {"message", d.message}};
  j["span"] = d.span ? span_to_json(*d.span) : Json(nullptr);
  if (!d.instance.empty()) j["instance"] = d.instance;
  return j;
}

Json render_to_json(const RenderResult& r) {
  Json j = {{"id", r.instance}, {"span", span_to_json(r.span)}};
  if (r.tree) j["tree"] = ui_to_json(*r.tree);
  if (r.error) j["error"] = diagnostic_to_json(*r.error);
  return j;
}

Json instance_to_json(const VisxInstance& inst) {
  Json j = {{"id", inst.id},
            {"name", inst.def ? inst.def->name.str() : inst.def_name.str()},
            {"resolved", inst.resolved()},
            {"span", span_to_json(inst.span)},
            {"state", datum_to_json(inst.state_with_defaults)}};
  if (inst.host) {
    j["host"] = {{"id", inst.host->host_id}, {"path", datum_to_json(Value::vector(inst.host->path))}};
  }
  return j;
}

Json error_to_json(const Error& e) {
  Json j = {{"kind", std::string(error_kind_name(e.kind()))}, {"message", e.what()}};
  if (e.span()) j["span"] = span_to_json(*e.span());
  return j;
}

}  // namespace hvx
