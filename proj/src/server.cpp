#include "hvx/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>

namespace hvx {

namespace {

struct RpcError {
  int code;
  std::string message;
  Json data;
};

[[noreturn]] void bad_params(const std::string& msg) { throw RpcError{rpc::kInvalidParams, msg, nullptr}; }

const Json& need(const Json& params, const char* key) {
  if (!params.is_object() || !params.contains(key)) bad_params(std::string("missing parameter '") + key + "'");
  return params[key];
}

std::string need_string(const Json& params, const char* key) {
  const Json& v = need(params, key);
  if (!v.is_string()) bad_params(std::string("parameter '") + key + "' must be a string");
  return v.get<std::string>();
}

std::size_t need_offset(const Json& params, const char* key) {
  const Json& v = need(params, key);
  if (!v.is_number_unsigned()) bad_params(std::string("parameter '") + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

std::string line_of(const Json& j) { return j.dump(-1, ' ', false, Json::error_handler_t::replace); }

Json response(const Json& id, Json result) { return {{"jsonrpc", "2.0"}, {"id", id}, {"result", std::move(result)}}; }

Json error_response(const Json& id, int code, const std::string& msg, const Json& data = nullptr) {
  Json err = {{"code", code}, {"message", msg}};
  if (!data.is_null()) err["data"] = data;
  return {{"jsonrpc", "2.0"}, {"id", id}, {"error", err}};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RpcError{rpc::kSessionError, "cannot open " + path, nullptr};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json run_result_json(const Session& s) {
  Json j = {{"status", std::string(run_status_name(s.run_status()))}};
  if (const auto& r = s.last_run()) {
    j["ok"] = r->ok;
    j["output"] = r->output;
    j["steps"] = r->steps;
    if (r->ok) {
      j["value"] = print_datum(r->value);
    } else if (r->error) {
      j["error"] = error_to_json(*r->error);
      j["phase"] = std::string(phase_name(r->phase));
    }
  }
  return j;
}

}  // namespace

Server::Server(ServerOptions options) : options_(std::move(options)) {}

void Server::notify(Out& out, const char* method, Json params) const {
  out.push_back(line_of(Json{{"jsonrpc", "2.0"}, {"method", method}, {"params", std::move(params)}}));
}

Server::Entry& Server::entry_for(const Json& params) {
  std::string sid = need_string(params, "session");
  auto it = sessions_.find(sid);
  if (it == sessions_.end()) throw RpcError{rpc::kSessionError, "unknown session " + sid, nullptr};
  return it->second;
}

Json Server::summary(const std::string& sid, Entry& e) const {
  const Session& s = *e.session;
  Json insts = Json::array();
  for (const auto& inst : s.instances()) {
    Json j = instance_to_json(inst);
    if (auto st = s.state(inst.id)) j["state"] = datum_to_json(*st);
    insts.push_back(std::move(j));
  }
  Json diags = Json::array();
  for (const auto& d : s.diagnostics()) diags.push_back(diagnostic_to_json(d));
  return {{"session", sid}, {"text", s.text()},          {"parsed", s.parsed()},
          {"instances", insts}, {"diagnostics", diags}, {"run", run_result_json(s)}};
}

void Server::emit_renders(Out& out, const std::string& sid, Entry& e) {
  Json renders = Json::array();
  for (const auto& r : e.session->render_all()) renders.push_back(render_to_json(r));
  notify(out, "renderUpdate", {{"session", sid}, {"renders", renders}});
}

void Server::emit_edit(Out& out, const std::string& sid, Entry& e, const EditOutcome& outcome) {
  if (!outcome.deltas.empty()) {
    Json deltas = Json::array();
    for (const auto& d : outcome.deltas) deltas.push_back({{"span", span_to_json(d.span)}, {"replacement", d.replacement}});
    notify(out, "documentDelta", {{"session", sid}, {"deltas", deltas}});
  }
  Json diags = Json::array();
  for (const auto& d : outcome.diagnostics) diags.push_back(diagnostic_to_json(d));
  for (const auto& d : e.session->diagnostics()) diags.push_back(diagnostic_to_json(d));
  notify(out, "diagnostic", {{"session", sid}, {"diagnostics", diags}});
  emit_renders(out, sid, e);
}

void Server::emit_run_progress(Out& out, const std::string& sid, Entry& e, bool finished) {
  std::string chunk = e.session->take_run_output();
  if (!chunk.empty()) notify(out, "runOutput", {{"session", sid}, {"text", chunk}});
  if (finished) {
    Json done = run_result_json(*e.session);
    done["session"] = sid;
    notify(out, "runDone", std::move(done));
  }
}

Json Server::dispatch_method(const std::string& method, const Json& params, Out& out) {
  if (method == "shutdown") {
    shutdown_ = true;
    return nullptr;
  }
  if (method == "session/open") {
    std::string text, path;
    if (params.is_object() && params.contains("path")) {
      path = need_string(params, "path");
      text = read_file(path);
    } else {
      text = need_string(params, "text");
    }
    std::string sid = "s" + std::to_string(++next_session_);
    Entry e{std::make_unique<Session>(std::move(text), options_.session), path};
    auto& slot = sessions_[sid] = std::move(e);
    return summary(sid, slot);
  }

  static const char* const kSessionMethods[] = {
      "session/get",     "session/render", "session/event", "session/setState", "session/applyTextEdit",
      "session/insertVisx", "session/listVisx", "session/run", "session/stop", "session/save", "session/close"};
  if (std::find(std::begin(kSessionMethods), std::end(kSessionMethods), method) == std::end(kSessionMethods)) {
    throw RpcError{rpc::kMethodNotFound, "method not found: " + method, nullptr};
  }
  std::string sid = need_string(params, "session");
  Entry& e = entry_for(params);
  Session& s = *e.session;

  if (method == "session/get") return summary(sid, e);
  if (method == "session/render") {
    Json renders = Json::array();
    if (params.contains("id")) {
      renders.push_back(render_to_json(s.render(need_string(params, "id"))));
    } else {
      for (const auto& r : s.render_all()) renders.push_back(render_to_json(r));
    }
    notify(out, "renderUpdate", {{"session", sid}, {"renders", renders}});
    return {{"count", renders.size()}};
  }
  if (method == "session/event") {
    UiEvent ev{need_string(params, "handler"), params.contains("payload") ? json_to_datum(params["payload"]) : Value()};
    auto outcome = s.dispatch(ev);
    emit_edit(out, sid, e, outcome);
    return {{"text", s.text()}, {"changed", !outcome.deltas.empty()}};
  }
  if (method == "session/setState") {
    std::string id = need_string(params, "instance");
    const Json& pj = need(params, "path");
    if (!pj.is_array()) bad_params("parameter 'path' must be an array");
    Vec path = json_to_datum(pj).items();
    auto outcome = s.set_state(id, path, json_to_datum(need(params, "value")));
    emit_edit(out, sid, e, outcome);
    return {{"text", s.text()}, {"changed", !outcome.deltas.empty()}};
  }
  if (method == "session/applyTextEdit") {
    SourceSpan span;
    try {
      span = json_to_span(need(params, "span"));
    } catch (const Error& err) {
      bad_params(err.what());
    }
    auto outcome = s.apply_text_edit(span, need_string(params, "text"));
    emit_edit(out, sid, e, outcome);
    return {{"text", s.text()}, {"parsed", s.parsed()}};
  }
  if (method == "session/insertVisx") {
    auto outcome = s.insert_visx(Name(need_string(params, "name")), need_offset(params, "offset"));
    emit_edit(out, sid, e, outcome);
    return {{"text", s.text()}};
  }
  if (method == "session/listVisx") {
    Json defs = Json::array();
    if (s.parsed()) {
      for (const auto& def : s.edit_world().registry().all()) {
        defs.push_back({{"name", def->name.str()},
                        {"written", written_name(*def)},
                        {"defaults", datum_to_json(def->defaults())}});
      }
    }
    return defs;
  }
  if (method == "session/run") {
    s.start_run();
    bool wait = params.contains("wait") && params["wait"].is_boolean() && params["wait"].get<bool>();
    if (s.run_status() != RunStatus::running) {
      emit_run_progress(out, sid, e, true);
    } else if (wait) {
      bool finished = false;
      while (!finished) {
        finished = s.step_run();
        emit_run_progress(out, sid, e, finished);
      }
    }
    return run_result_json(s);
  }
  if (method == "session/stop") {
    bool was_running = s.run_status() == RunStatus::running;
    s.stop_run();
    if (was_running) emit_run_progress(out, sid, e, true);
    return run_result_json(s);
  }
  if (method == "session/save") {
    std::string path = params.contains("path") ? need_string(params, "path") : e.path;
    if (path.empty()) bad_params("session has no path; pass 'path'");
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << s.text();
    f.close();
    if (!f) throw RpcError{rpc::kSessionError, "cannot write " + path, nullptr};
    e.path = path;
    return {{"path", path}, {"bytes", s.text().size()}};
  }
  if (method == "session/close") {
    if (s.run_status() == RunStatus::running) s.stop_run();
    sessions_.erase(sid);
    return {{"closed", sid}};
  }
  throw RpcError{rpc::kMethodNotFound, "method not found: " + method, nullptr};
}

std::vector<std::string> Server::handle(std::string_view line) {
  Out out;
  Json req;
  try {
    req = Json::parse(line);
  } catch (const Json::parse_error& e) {
    out.push_back(line_of(error_response(nullptr, rpc::kParseError, "parse error")));
    return out;
  }
  bool has_id = req.is_object() && req.contains("id");
  Json id = has_id ? req["id"] : Json(nullptr);
  if (!req.is_object() || !req.contains("method") || !req["method"].is_string() ||
      (req.contains("jsonrpc") && req["jsonrpc"] != "2.0") ||
      (has_id && !(id.is_string() || id.is_number_integer() || id.is_null()))) {
    out.push_back(line_of(error_response(has_id ? id : Json(nullptr), rpc::kInvalidRequest, "invalid request")));
    return out;
  }
  Json params = req.contains("params") ? req["params"] : Json::object();
  Json reply;
  try {
    if (!params.is_object()) bad_params("params must be an object");
    reply = response(id, dispatch_method(req["method"].get<std::string>(), params, out));
  } catch (const RpcError& e) {
    reply = error_response(id, e.code, e.message, e.data);
  } catch (const Error& e) {
    reply = error_response(id, rpc::kSessionError, e.what(), error_to_json(e));
  } catch (const std::exception& e) {
    reply = error_response(id, rpc::kSessionError, e.what());
  }
  if (has_id) out.push_back(line_of(reply));
  return out;
}

bool Server::has_active_runs() const {
  for (const auto& [sid, e] : sessions_) {
    if (e.session->run_status() == RunStatus::running) return true;
  }
  return false;
}

std::vector<std::string> Server::pump() {
  Out out;
  for (auto& [sid, e] : sessions_) {
    if (e.session->run_status() != RunStatus::running) continue;
    bool finished = e.session->step_run();
    emit_run_progress(out, sid, e, finished);
  }
  return out;
}

namespace {

using Writer = std::function<bool(const std::string&)>;

int serve_loop(Server& server, int in_fd, const Writer& write) {
  std::string buf;
  char chunk[65536];
  bool eof = false;
  auto emit = [&](const std::vector<std::string>& lines) {
    for (const auto& l : lines) {
      if (!write(l + "\n")) return false;
    }
    return true;
  };
  while (!server.shutdown_requested()) {
    if (!eof) {
      pollfd p{in_fd, POLLIN, 0};
      int timeout = server.has_active_runs() ? 0 : -1;
      int rc = ::poll(&p, 1, timeout);
      if (rc < 0) {
        if (errno == EINTR) continue;
        return 2;
      }
      if (rc > 0) {
        ssize_t n = ::read(in_fd, chunk, sizeof chunk);
        if (n < 0) {
          if (errno == EINTR) continue;
          return 2;
        }
        if (n == 0) {
          eof = true;
          if (!buf.empty()) buf.push_back('\n');
        } else {
          buf.append(chunk, static_cast<std::size_t>(n));
        }
        std::size_t pos;
        while ((pos = buf.find('\n')) != std::string::npos && !server.shutdown_requested()) {
          std::string line = buf.substr(0, pos);
          buf.erase(0, pos + 1);
          if (!line.empty() && line.back() == '\r') line.pop_back();
          if (line.find_first_not_of(" \t") == std::string::npos) continue;
          if (!emit(server.handle(line))) return 2;
        }
        if (buf.size() > server.options().max_line_bytes) {
          buf.clear();
          if (!emit({line_of(error_response(nullptr, rpc::kInvalidRequest, "request line too long"))})) return 2;
        }
        continue;
      }
    }
    if (server.has_active_runs()) {
      if (!emit(server.pump())) return 2;
    } else if (eof) {
      break;
    }
  }
  return 0;
}

}  // namespace

int serve_fd(Server& server, int in_fd, std::ostream& out) {
  return serve_loop(server, in_fd, [&](const std::string& s) {
    out << s;
    out.flush();
    return static_cast<bool>(out);
  });
}

int serve_tcp(Server& server, int port, std::ostream& log, const std::function<void(int)>& on_listening) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) {
    log << "socket: " << std::strerror(errno) << "\n";
    return 2;
  }
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(fd, 1) < 0) {
    log << "bind 127.0.0.1:" << port << ": " << std::strerror(errno) << "\n";
    ::close(fd);
    return 2;
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  log << "listening on 127.0.0.1:" << ntohs(addr.sin_port) << "\n";
  log.flush();
  if (on_listening) on_listening(ntohs(addr.sin_port));
  int rc = 0;
  while (!server.shutdown_requested()) {
    int client = ::accept(fd, nullptr, nullptr);
    if (client < 0) {
      if (errno == EINTR) continue;
      rc = 2;
      break;
    }
    serve_loop(server, client, [client](const std::string& s) {
      std::size_t off = 0;
      while (off < s.size()) {
        ssize_t n = ::send(client, s.data() + off, s.size() - off, MSG_NOSIGNAL);
        if (n <= 0) return false;
        off += static_cast<std::size_t>(n);
      }
      return true;
    });
    ::close(client);
  }
  ::close(fd);
  return rc;
}

}  // namespace hvx
