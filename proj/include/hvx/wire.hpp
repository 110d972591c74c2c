#pragma once

// JSON encodings shared by the protocol server, the corpus transcripts and
// the Python binding.
//
// Datums: nil -> null, booleans and numbers as themselves, keywords as
// ":name", strings as themselves with a leading '\' added when they start
// with ':' or '\', symbols as their bare name (decoded back as strings),
// lists and vectors as arrays, maps as objects keyed by the encoded key.

#include <json.hpp>
#include <string>

#include "hvx/reader.hpp"
#include "hvx/session.hpp"
#include "hvx/value.hpp"

namespace hvx {

using Json = nlohmann::ordered_json;

Json datum_to_json(const Value& v);
Value json_to_datum(const Json& j);

Json span_to_json(const SourceSpan& span);
/// Accepts {"start": s, "end": e}; throws Error(session) otherwise.
SourceSpan json_to_span(const Json& j);

/// Elements: {"tag", "attrs", "children"}; text: {"text"}. Handler attributes
/// encode as {"handler": "h:<n>"}, state paths as {"path": [...]}.
Json ui_to_json(const UiNode& node);
/// Inverse of ui_to_json; throws Error(session) on malformed input.
UiNode json_to_ui(const Json& j);
Json diagnostic_to_json(const Diagnostic& d);
Json render_to_json(const RenderResult& r);
Json instance_to_json(const VisxInstance& inst);
Json error_to_json(const Error& e);

}  // namespace hvx
