#pragma once

// Fixture harness. A corpus directory holds manifest.json plus the .hvx
// sources, optional textual oracle programs and *.events.json transcripts.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hvx/session.hpp"
#include "hvx/wire.hpp"

namespace hvx {

struct FixtureSpec {
  std::string name;
  std::filesystem::path source;
  std::optional<std::filesystem::path> oracle;  // plain program computing the same value
  std::optional<std::filesystem::path> events;  // transcript
  std::optional<std::string> value;             // expected print_datum of the run value
  std::optional<std::string> output;            // expected printed output
  int instances = -1;                           // expected instance count, -1 = unchecked
};

struct FixtureReport {
  std::string name;
  bool passed = true;
  std::vector<std::string> diffs;
  std::string value;  // print_datum of the cli-style run value

  void fail(std::string msg) {
    passed = false;
    diffs.push_back(std::move(msg));
  }
};

std::filesystem::path default_corpus_dir();
std::vector<FixtureSpec> load_manifest(const std::filesystem::path& corpus_dir);
/// Throws Error(session) for an unknown name.
FixtureSpec find_fixture(const std::vector<FixtureSpec>& specs, std::string_view name);

std::string read_text_file(const std::filesystem::path& path);

/// Runs the fixture without a session, through a session's Run action, and
/// against its oracle and manifest expectations; replays its transcript.
FixtureReport fixture_check(const FixtureSpec& spec, const SessionOptions& options = {});

struct TranscriptResult {
  bool passed = true;
  std::vector<std::string> diffs;
  std::string final_text;
  std::optional<ProgramResult> last_run;
};

/// Replays `steps` (the "steps" array of a transcript) against a session
/// opened on `text`.
TranscriptResult replay_transcript(const std::string& text, const Json& steps, const SessionOptions& options = {});
TranscriptResult fixture_events(const FixtureSpec& spec, const SessionOptions& options = {});

/// Finds the handler id bound to attribute `attr` on the nth element (in
/// preorder) of the instance's current render that carries it.
std::optional<std::string> find_handler(Session& session, const std::string& instance, const std::string& attr,
                                        std::size_t nth = 0);

}  // namespace hvx
