// hvx: run, expand, serve and check hybrid programs.
#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "hvx/corpus.hpp"
#include "hvx/program.hpp"
#include "hvx/reader.hpp"
#include "hvx/server.hpp"
#include "hvx/wire.hpp"

namespace {

bool slurp(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "hvx: cannot read " << path << "\n";
    return false;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

std::string where(const std::string& file, const std::string& text, const hvx::Error& e) {
  std::ostringstream os;
  os << file;
  if (e.span()) {
    auto [line, col] = hvx::line_col(text, e.span()->start);
    os << ":" << line << ":" << col;
  }
  os << ": " << hvx::error_kind_name(e.kind()) << " error: " << e.what();
  return os.str();
}

int cmd_run(const std::string& file, std::uint64_t fuel, bool json) {
  std::string text;
  if (!slurp(file, text)) return 2;
  hvx::RunOptions opts;
  if (fuel) {
    opts.compile_fuel = fuel;
    opts.run_fuel = fuel;
  }
  hvx::ProgramResult r = hvx::run_program(text, opts);
  if (json) {
    hvx::Json j = {{"ok", r.ok}, {"output", r.output}, {"steps", r.steps}};
    if (r.ok) {
      j["value"] = hvx::print_datum(r.value);
    } else {
      j["error"] = hvx::error_to_json(*r.error);
      j["phase"] = std::string(hvx::phase_name(r.phase));
    }
    std::cout << j.dump() << "\n";
    return r.ok ? 0 : 1;
  }
  std::cout << r.output;
  if (!r.ok) {
    std::cout.flush();
    std::cerr << where(file, text, *r.error) << "\n";
    return 1;
  }
  std::cout << hvx::print_datum(r.value) << "\n";
  return 0;
}

int cmd_expand(const std::string& file, std::uint64_t fuel) {
  std::string text;
  if (!slurp(file, text)) return 2;
  hvx::RunOptions opts;
  if (fuel) opts.compile_fuel = fuel;
  try {
    for (const auto& f : hvx::compile_program(text, opts).forms) std::cout << hvx::print_datum(f) << "\n";
  } catch (const hvx::Error& e) {
    std::cerr << where(file, text, e) << "\n";
    return 1;
  }
  return 0;
}

int cmd_serve(int port, std::uint64_t fuel) {
  hvx::ServerOptions opts;
  if (fuel) opts.session.edit_fuel = fuel;
  hvx::Server server(opts);
  if (port >= 0) return hvx::serve_tcp(server, port, std::cerr);
  return hvx::serve_fd(server, STDIN_FILENO, std::cout);
}

int cmd_check(const std::string& dir, const std::vector<std::string>& names) {
  std::vector<hvx::FixtureSpec> specs;
  try {
    specs = hvx::load_manifest(dir.empty() ? hvx::default_corpus_dir() : std::filesystem::path(dir));
  } catch (const hvx::Error& e) {
    std::cerr << "hvx: " << e.what() << "\n";
    return 2;
  }
  int failed = 0;
  for (const auto& spec : specs) {
    if (!names.empty() && std::find(names.begin(), names.end(), spec.name) == names.end()) continue;
    hvx::FixtureReport rep = hvx::fixture_check(spec);
    std::cout << (rep.passed ? "PASS " : "FAIL ") << spec.name << "  => " << rep.value << "\n";
    for (const auto& d : rep.diffs) std::cout << "    " << d << "\n";
    failed += rep.passed ? 0 : 1;
  }
  return failed ? 1 : 0;
}

int cmd_render(const std::string& file) {
  std::string text;
  if (!slurp(file, text)) return 2;
  hvx::Session s(text);
  hvx::Json out = hvx::Json::array();
  for (const auto& r : s.render_all()) out.push_back(hvx::render_to_json(r));
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid program kernel"};
  app.require_subcommand(1);
  std::string file, corpus;
  std::uint64_t fuel = 0;
  bool json = false, stdio = false;
  int port = -1;
  std::vector<std::string> names;

  auto* run = app.add_subcommand("run", "expand and evaluate a file without a session");
  run->add_option("file", file)->required();
  run->add_option("--fuel", fuel, "step budget for expansion and evaluation");
  run->add_flag("--json", json, "machine-readable result");

  auto* expand = app.add_subcommand("expand", "print the fully expanded program");
  expand->add_option("file", file)->required();
  expand->add_option("--fuel", fuel, "expansion step budget per form");

  auto* serve = app.add_subcommand("serve", "JSON-RPC over stdio or a localhost socket");
  auto* stdio_flag = serve->add_flag("--stdio", stdio, "serve on standard streams (default)");
  serve->add_option("--port", port, "listen on 127.0.0.1:PORT (0 picks one)")
      ->check(CLI::Range(0, 65535))
      ->excludes(stdio_flag);
  serve->add_option("--fuel", fuel, "edit-phase step budget");

  auto* check = app.add_subcommand("check", "check corpus fixtures against their oracles");
  check->add_option("names", names, "fixtures to check (default all)");
  check->add_option("--corpus", corpus, "corpus directory");

  auto* render = app.add_subcommand("render", "render every instance of a file as JSON");
  render->add_option("file", file)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(file, fuel, json);
    if (*expand) return cmd_expand(file, fuel);
    if (*serve) return cmd_serve(stdio ? -1 : port, fuel);
    if (*check) return cmd_check(corpus, names);
    if (*render) return cmd_render(file);
  } catch (const std::exception& e) {
    std::cerr << "hvx: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
