#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "ipikit/certificate_authority.hpp"
#include "ipikit/config.hpp"
#include "ipikit/events.hpp"
#include "ipikit/http_message.hpp"
#include "ipikit/net.hpp"
#include "ipikit/payload_library.hpp"

namespace ipikit {

struct ResponseMeta {
  std::string url;
  int status = 0;
  std::optional<std::string> content_type;
  std::optional<std::string> content_encoding;
};

ResponseMeta response_meta(const std::string& url, const HttpResponse& response);

/// The four-way injection gate: URL pattern, HTML media type, allowed
/// status, remaining budget. When false and skip_reason is non-null, the
/// reason slug is written there.
bool should_modify(const ResponseMeta& meta, const TestConfig& config, bool selector_exhausted,
                   std::string* skip_reason = nullptr);

struct SessionStats {
  uint64_t responses_seen = 0;
  uint64_t modified = 0;
  std::map<std::string, uint64_t> skipped;  // reason -> count
};

/// Per-run shared state: config, payload selector, technique/point
/// generators, and the injection event log. Draws and sequence numbers are
/// serialized under one lock so event logs stay gap-free under concurrent
/// response handling.
class Session {
 public:
  Session(TestConfig config, std::shared_ptr<Selector> selector, uint64_t seed,
          const std::filesystem::path& event_log_path, CompletionEndpoint llm = {});

  const TestConfig& config() const { return config_; }
  uint64_t seed() const { return seed_; }
  const Selector& selector() const { return *selector_; }
  const std::filesystem::path& event_log_path() const { return event_log_.path(); }

  /// Runs decide -> select -> wrap -> inject on one decoded-or-encodable
  /// response. Returns true when the response was modified (and the event
  /// logged); otherwise skip_reason names the pass-through cause. Throws
  /// only on internal pipeline errors; the response is untouched then.
  bool rewrite_response(HttpResponse& response, const std::string& url,
                        std::string* skip_reason);

  SessionStats stats() const;
  void count_seen();
  void count_modified();
  void count_skipped(const std::string& reason);

  /// Test seam: invoked after the payload draw, inside the pipeline's error
  /// isolation boundary.
  void set_pipeline_hook(std::function<void()> hook) { pipeline_hook_ = std::move(hook); }

 private:
  TestConfig config_;
  std::shared_ptr<Selector> selector_;
  uint64_t seed_;
  Rng technique_rng_;
  Rng point_rng_;
  CompletionEndpoint llm_;
  JsonlWriter event_log_;
  std::function<void()> pipeline_hook_;

  mutable std::mutex mutex_;
  uint64_t sequence_ = 0;
  SessionStats stats_;
};

struct ProxySettings {
  std::string bind_host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path state_dir = "state";
  int io_timeout_ms = 15000;
  bool verify_upstream = false;
};

std::pair<std::string, int> parse_bind_address(const std::string& bind);

/// Intercepting forward proxy. Requests are forwarded upstream unchanged;
/// qualifying HTML responses are rewritten through the session pipeline.
/// CONNECT tunnels to hosts matching the target pattern are terminated with
/// a CA-signed leaf certificate; all other tunnels pass through opaquely.
class ProxyServer {
 public:
  ProxyServer(std::shared_ptr<Session> session, ProxySettings settings);
  ~ProxyServer();
  ProxyServer(const ProxyServer&) = delete;
  ProxyServer& operator=(const ProxyServer&) = delete;

  /// Pre-flight (CA material, bind) then serve in background threads.
  void start();
  void stop();

  int port() const { return port_; }
  std::filesystem::path ca_certificate_path() const;
  SessionStats stats() const { return session_->stats(); }
  Session& session() { return *session_; }

 private:
  void accept_loop();
  void handle_connection(int fd);
  bool handle_exchange(const HttpRequest& request, Stream& agent,
                       const std::string& scheme, const std::string& host, int port);
  void handle_connect(const HttpRequest& request, SocketStream& agent);
  void run_tls_session(Stream& agent, const std::string& host, int port);
  void opaque_tunnel(const std::string& host, int port, SocketStream& agent);
  void track_fd(int fd);
  void untrack_fd(int fd);

  std::shared_ptr<Session> session_;
  ProxySettings settings_;
  std::optional<CertificateAuthority> ca_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> running_{false};
  std::thread accept_thread_;
  std::mutex workers_mutex_;
  std::vector<std::thread> workers_;
  std::set<int> open_fds_;
};

}  // namespace ipikit
