#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hvx/interp.hpp"
#include "hvx/program.hpp"
#include "hvx/reader.hpp"
#include "hvx/value.hpp"
#include "hvx/visx.hpp"

namespace hvx {

/// Attribute of a rendered element: plain data, an event handler registered
/// for the current render, or a path into the instance state.
struct UiAttr {
  enum class Type { data, handler, path };
  Type type = Type::data;
  Value data;           // scalar, or a map of scalars (style)
  std::string handler;  // "h:<n>"
  Vec path;
};

struct UiNode {
  enum class Type { element, text };
  Type type = Type::element;
  std::string tag;  // element tag without the leading ':'
  std::string text;
  std::vector<std::pair<std::string, UiAttr>> attrs;
  std::vector<UiNode> children;

  const UiAttr* attr(std::string_view name) const;
};

struct UiEvent {
  std::string handler;
  Value payload;
};

struct Diagnostic {
  std::optional<SourceSpan> span;
  Phase phase = Phase::edit;
  std::string message;
  std::string instance;  // instance id when the diagnostic belongs to one
};

/// One replacement applied to the document text. Spans refer to the text as
/// it was before the edit; a list of deltas applies in order.
struct DocumentDelta {
  SourceSpan span;
  std::string replacement;
};

struct EditOutcome {
  std::vector<DocumentDelta> deltas;
  std::vector<Diagnostic> diagnostics;
};

struct RenderResult {
  std::string instance;
  SourceSpan span;  // document span of the instance (of its host when nested)
  std::optional<UiNode> tree;
  std::optional<Diagnostic> error;
};

enum class RunStatus { idle, running, stopped, crashed };

std::string_view run_status_name(RunStatus status);

struct SessionOptions {
  std::uint64_t edit_fuel = 1'000'000;  // per render, handler call or top-level form
  RunOptions run;
};

/// An open document together with its edit-phase world, the state box of
/// every VIsx instance and the handlers of the latest render. The document
/// text is the single source of truth: every state change is written back
/// into it, and the edit world is rebuilt from the new text.
class Session {
 public:
  explicit Session(std::string text, SessionOptions options = {});
  ~Session();

  const std::string& text() const { return text_; }
  /// False while the text does not parse (text-only mode).
  bool parsed() const { return doc_.has_value(); }
  const Document& document() const;
  const std::vector<VisxInstance>& instances() const { return instances_; }
  const VisxInstance* instance(std::string_view id) const;
  /// Diagnostics of the latest reload: read, expansion and scan problems.
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }
  /// Current state of an instance (its box value).
  std::optional<Value> state(std::string_view id) const;
  Interpreter& edit_world() { return *world_; }

  std::vector<RenderResult> render_all();
  RenderResult render(std::string_view id);

  /// Calls a handler from the latest render with the event payload. Throws
  /// Error(session) for an unknown or stale handler id.
  EditOutcome dispatch(const UiEvent& event);
  /// Sets the value at `path` of an instance's state and writes it back.
  EditOutcome set_state(std::string_view id, const Vec& path, const Value& value);
  /// Replaces an arbitrary byte range of the text.
  EditOutcome apply_text_edit(SourceSpan span, std::string_view replacement);
  /// Inserts a default instance of a registered definition at `offset`.
  EditOutcome insert_visx(Name name, std::size_t offset);

  // run phase
  void start_run();
  /// Advances the active run one quantum; true when it has ended.
  bool step_run();
  void stop_run();
  /// Runs the current text to completion.
  ProgramResult run();
  RunStatus run_status() const { return run_status_; }
  const std::string& run_crash_reason() const { return crash_reason_; }
  std::string take_run_output();
  const std::optional<ProgramResult>& last_run() const { return last_run_; }
  const RunTask* active_run() const { return run_.get(); }

 private:
  struct Handler {
    std::string instance;
    Value fn;
  };

  void reload();
  void set_text(std::string text);
  std::optional<SourceSpan> document_span(const VisxInstance& inst) const;
  UiNode to_ui(const Value& hiccup, const std::string& instance, int depth);
  void add_attr(UiNode& node, const Value& key, const Value& val, const std::string& instance);
  EditOutcome write_back(const std::map<std::string, std::uint64_t>& versions,
                         const std::map<std::string, Value>& snapshot);
  void finish_run_bookkeeping();

  SessionOptions options_;
  std::string text_;
  std::optional<Document> doc_;
  std::unique_ptr<Interpreter> world_;
  std::vector<VisxInstance> instances_;
  std::vector<Diagnostic> diagnostics_;
  std::map<std::string, Value> boxes_;
  std::map<std::string, Handler> handlers_;
  std::uint64_t next_handler_ = 0;

  std::unique_ptr<RunTask> run_;
  RunStatus run_status_ = RunStatus::idle;
  std::string crash_reason_;
  std::string run_output_;  // not yet taken by take_run_output
  std::string all_output_;
  std::optional<ProgramResult> last_run_;
};

}  // namespace hvx
