#pragma once

// Newline-delimited JSON-RPC 2.0 front end over Session. Each request line
// yields zero or more notification lines followed by the response line.

#include <cstdint>
#include <istream>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "hvx/session.hpp"
#include "hvx/wire.hpp"

namespace hvx {

namespace rpc {
constexpr int kParseError = -32700;
constexpr int kInvalidRequest = -32600;
constexpr int kMethodNotFound = -32601;
constexpr int kInvalidParams = -32602;
constexpr int kSessionError = -32000;
}  // namespace rpc

struct ServerOptions {
  SessionOptions session;
  std::uint64_t max_line_bytes = 16u << 20;
};

class Server {
 public:
  explicit Server(ServerOptions options = {});

  /// Handles one request line; returns the lines to send, in order.
  std::vector<std::string> handle(std::string_view line);
  /// Advances every active run by one quantum and returns the resulting
  /// runOutput / runDone notifications.
  std::vector<std::string> pump();
  bool has_active_runs() const;
  bool shutdown_requested() const { return shutdown_; }
  const ServerOptions& options() const { return options_; }
  std::size_t session_count() const { return sessions_.size(); }

 private:
  struct Entry {
    std::unique_ptr<Session> session;
    std::string path;
  };
  using Out = std::vector<std::string>;

  Json dispatch_method(const std::string& method, const Json& params, Out& out);
  Entry& entry_for(const Json& params);
  void notify(Out& out, const char* method, Json params) const;
  void emit_edit(Out& out, const std::string& sid, Entry& e, const EditOutcome& outcome);
  void emit_renders(Out& out, const std::string& sid, Entry& e);
  void emit_run_progress(Out& out, const std::string& sid, Entry& e, bool finished);
  Json summary(const std::string& sid, Entry& e) const;

  ServerOptions options_;
  std::map<std::string, Entry> sessions_;
  std::uint64_t next_session_ = 0;
  bool shutdown_ = false;
};

/// Reads requests from `in_fd` until EOF or shutdown, interleaving run quanta
/// while input is idle. Returns 0 on clean shutdown.
int serve_fd(Server& server, int in_fd, std::ostream& out);
/// Listens on 127.0.0.1:`port` (0 picks a free port, reported through
/// `on_listening`) and serves one client at a time.
int serve_tcp(Server& server, int port, std::ostream& log, const std::function<void(int)>& on_listening = {});

}  // namespace hvx
