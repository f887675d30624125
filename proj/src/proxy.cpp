#include "ipikit/proxy.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

#include "ipikit/content_coding.hpp"
#include "ipikit/embedding.hpp"
#include "ipikit/injector.hpp"
#include "ipikit/tls.hpp"
#include "ipikit/url_match.hpp"

namespace ipikit {

ResponseMeta response_meta(const std::string& url, const HttpResponse& response) {
  ResponseMeta meta;
  meta.url = url;
  meta.status = response.status;
  meta.content_type = response.headers.get("Content-Type");
  meta.content_encoding = response.headers.get("Content-Encoding");
  return meta;
}

bool should_modify(const ResponseMeta& meta, const TestConfig& config, bool selector_exhausted,
                   std::string* skip_reason) {
  auto skip = [&](const char* reason) {
    if (skip_reason != nullptr) *skip_reason = reason;
    return false;
  };
  if (!match_url(meta.url, config.url_patterns)) return skip("url_mismatch");
  if (!meta.content_type) return skip("not_html");
  std::string media = media_type_of(*meta.content_type);
  if (media != "text/html" && media != "application/xhtml+xml") return skip("not_html");
  if (!config.allowed_status.contains(meta.status)) return skip("status_not_allowed");
  if (selector_exhausted) return skip("budget_exhausted");
  return true;
}

Session::Session(TestConfig config, std::shared_ptr<Selector> selector, uint64_t seed,
                 const std::filesystem::path& event_log_path, CompletionEndpoint llm)
    : config_(std::move(config)),
      selector_(std::move(selector)),
      seed_(seed),
      llm_(std::move(llm)),
      event_log_(event_log_path) {
  // Independent streams per draw kind, all derived from the session seed.
  uint64_t state = seed_;
  splitmix64(state);  // selector consumed the raw seed
  technique_rng_.seed(splitmix64(state));
  point_rng_.seed(splitmix64(state));
}

bool Session::rewrite_response(HttpResponse& response, const std::string& url,
                               std::string* skip_reason) {
  auto skip = [&](const char* reason) {
    if (skip_reason != nullptr) *skip_reason = reason;
    return false;
  };

  ResponseMeta meta = response_meta(url, response);
  std::string gate_reason;
  if (!should_modify(meta, config_, selector_->exhausted(), &gate_reason)) {
    return skip(gate_reason.c_str());
  }

  if (response.body.size() > config_.max_body_bytes) return skip("body_too_large");

  std::string decoded = response.body;
  if (meta.content_encoding) {
    if (!coding_chain_supported(*meta.content_encoding)) {
      log_warn("skipping " + url + ": unsupported content coding \"" + *meta.content_encoding +
               "\"");
      return skip("unsupported_content_encoding");
    }
    auto result = decode_body(response.body, *meta.content_encoding);
    if (!result) {
      log_warn("skipping " + url + ": content decoding failed");
      return skip("decode_failed");
    }
    decoded = std::move(*result);
  }
  if (decoded.size() > config_.max_body_bytes) return skip("body_too_large");

  std::optional<PayloadRecord> record;
  Technique technique{};
  InsertionPoint point{};
  {
    std::lock_guard<std::mutex> lock(mutex_);
    record = selector_->next();
    if (!record) return skip("budget_exhausted");
    technique = resolve_technique(config_.embedding, technique_rng_);
    point = resolve_insertion_point(config_.insertion_point, point_rng_);
  }
  if (pipeline_hook_) pipeline_hook_();

  WrappedBlock block = build_block(record->payload, record->id, technique,
                                   config_.exfil_tracker_url, &llm_);
  InjectionResult result = inject(decoded, block, point);

  InjectionEvent event;
  event.timestamp_ms = now_millis();
  event.url = url;
  event.payload_id = record->id;
  event.technique = technique_name(technique);
  event.requested_point = insertion_point_name(point);
  event.applied_point = applied_point_name(result.applied_point);
  event.fallback_used = result.fallback_used;
  event.altered = result.altered;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    event.session_sequence = ++sequence_;
    event_log_.append(injection_event_to_json(event));
  }

  response.body = std::move(result.document);
  response.headers.remove("Content-Encoding");
  response.headers.remove("ETag");
  response.headers.remove("Last-Modified");
  response.headers.set("Content-Length", std::to_string(response.body.size()));
  return true;
}

SessionStats Session::stats() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return stats_;
}

void Session::count_seen() {
  std::lock_guard<std::mutex> lock(mutex_);
  ++stats_.responses_seen;
}

void Session::count_modified() {
  std::lock_guard<std::mutex> lock(mutex_);
  ++stats_.modified;
}

void Session::count_skipped(const std::string& reason) {
  std::lock_guard<std::mutex> lock(mutex_);
  ++stats_.skipped[reason];
}

std::pair<std::string, int> parse_bind_address(const std::string& bind) {
  size_t colon = bind.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 >= bind.size()) {
    throw Error("bind address must be host:port, got \"" + bind + "\"");
  }
  int port;
  try {
    port = std::stoi(bind.substr(colon + 1));
  } catch (...) {
    throw Error("bind address must be host:port, got \"" + bind + "\"");
  }
  if (port < 0 || port > 65535) throw Error("bind port out of range: " + bind);
  return {bind.substr(0, colon), port};
}

// ---- ProxyServer ------------------------------------------------------------

namespace {

bool wants_keep_alive(const HttpRequest& request) {
  auto connection = request.headers.get("Connection");
  bool http11 = request.version != "HTTP/1.0";
  if (!connection) return http11;
  for (const auto& token : split(*connection, ',')) {
    if (iequals(trim(token), "close")) return false;
    if (iequals(trim(token), "keep-alive")) return true;
  }
  return http11;
}

void write_error_response(Stream& stream, int status, const std::string& reason,
                          const std::string& text) {
  HttpResponse response;
  response.status = status;
  response.reason = reason;
  response.body = text + "\n";
  response.headers.add("Content-Type", "text/plain");
  response.headers.add("Content-Length", std::to_string(response.body.size()));
  response.headers.add("Connection", "close");
  stream.write_all(serialize_response(response));
}

bool response_allows_body(const HttpRequest& request, const HttpResponse& response) {
  return request.method != "HEAD" && response.status / 100 != 1 && response.status != 204 &&
         response.status != 304;
}

}  // namespace

ProxyServer::ProxyServer(std::shared_ptr<Session> session, ProxySettings settings)
    : session_(std::move(session)), settings_(std::move(settings)) {}

ProxyServer::~ProxyServer() { stop(); }

void ProxyServer::start() {
  ca_ = CertificateAuthority::open_or_create(settings_.state_dir);
  listen_fd_ = tcp_listen(settings_.bind_host, settings_.port, &port_);
  running_ = true;
  accept_thread_ = std::thread(&ProxyServer::accept_loop, this);
}

void ProxyServer::stop() {
  if (!running_.exchange(false)) return;
  if (listen_fd_ >= 0) {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  if (accept_thread_.joinable()) accept_thread_.join();
  {
    std::lock_guard<std::mutex> lock(workers_mutex_);
    for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
  }
  std::vector<std::thread> workers;
  {
    std::lock_guard<std::mutex> lock(workers_mutex_);
    workers.swap(workers_);
  }
  for (auto& worker : workers) {
    if (worker.joinable()) worker.join();
  }
}

std::filesystem::path ProxyServer::ca_certificate_path() const {
  return ca_ ? ca_->certificate_path() : std::filesystem::path{};
}

void ProxyServer::track_fd(int fd) {
  std::lock_guard<std::mutex> lock(workers_mutex_);
  open_fds_.insert(fd);
}

void ProxyServer::untrack_fd(int fd) {
  std::lock_guard<std::mutex> lock(workers_mutex_);
  open_fds_.erase(fd);
}

void ProxyServer::accept_loop() {
  while (running_) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (!running_) break;
      continue;
    }
    set_socket_timeouts(fd, settings_.io_timeout_ms);
    track_fd(fd);
    std::lock_guard<std::mutex> lock(workers_mutex_);
    workers_.emplace_back(&ProxyServer::handle_connection, this, fd);
  }
}

void ProxyServer::handle_connection(int fd) {
  SocketStream agent(fd);
  BufferedReader reader(agent);
  try {
    while (running_) {
      auto request = read_request_head(reader);
      if (!request) break;
      if (request->method == "CONNECT") {
        handle_connect(*request, agent);
        break;
      }
      read_request_body(reader, *request);

      auto url = parse_absolute_url(request->target);
      if (!url || url->scheme != "http") {
        write_error_response(agent, 400, "Bad Request",
                             "proxy requires absolute-form http:// request targets");
        break;
      }
      bool keep_alive = wants_keep_alive(*request);
      HttpRequest upstream = *request;
      upstream.target = url->path + (url->query.empty() ? "" : "?" + url->query);
      if (!handle_exchange(upstream, agent, "http", url->host,
                           url->port == -1 ? 80 : url->port)) {
        break;
      }
      if (!keep_alive) break;
    }
  } catch (const std::exception& e) {
    log_warn(std::string("connection error: ") + e.what());
  }
  untrack_fd(fd);
}

bool ProxyServer::handle_exchange(const HttpRequest& request, Stream& agent,
                                  const std::string& scheme, const std::string& host, int port) {
  // Absolute URL for matching and event logs.
  std::string url = scheme + "://" + host;
  int default_port = scheme == "https" ? 443 : 80;
  if (port != default_port) url += ":" + std::to_string(port);
  url += request.target;

  HttpRequest upstream = request;
  strip_hop_by_hop(upstream.headers);
  if (!upstream.headers.has("Host")) {
    upstream.headers.add("Host",
                         port == default_port ? host : host + ":" + std::to_string(port));
  }
  upstream.headers.add("Connection", "close");

  HttpResponse response;
  try {
    std::unique_ptr<Stream> origin;
    if (scheme == "https") {
      origin = tls_client_connect(host, port, settings_.io_timeout_ms,
                                  settings_.verify_upstream);
    } else {
      origin = tcp_connect(host, port, settings_.io_timeout_ms);
    }
    if (!origin->write_all(serialize_request(upstream))) {
      throw Error("upstream write failed");
    }
    BufferedReader origin_reader(*origin);
    auto result = read_response(origin_reader, request.method == "HEAD", 1ULL << 30);
    if (!result) throw Error("no response from upstream");
    response = std::move(*result);
  } catch (const std::exception& e) {
    log_warn("upstream " + host + ":" + std::to_string(port) + ": " + e.what());
    write_error_response(agent, 502, "Bad Gateway", e.what());
    return false;
  }

  session_->count_seen();
  if (!response_allows_body(request, response)) {
    session_->count_skipped("bodyless_response");
  } else {
    try {
      std::string reason;
      if (session_->rewrite_response(response, url, &reason)) {
        session_->count_modified();
      } else {
        session_->count_skipped(reason);
      }
    } catch (const std::exception& e) {
      // Never drop a response because of an injection bug.
      log_warn("pipeline error on " + url + ": " + e.what());
      session_->count_skipped("pipeline_error");
    }
  }

  strip_hop_by_hop(response.headers);
  if (response_allows_body(request, response)) {
    response.headers.set("Content-Length", std::to_string(response.body.size()));
  } else {
    response.body.clear();
  }
  bool keep_alive = wants_keep_alive(request);
  response.headers.add("Connection", keep_alive ? "keep-alive" : "close");
  return agent.write_all(serialize_response(response)) && keep_alive;
}

void ProxyServer::handle_connect(const HttpRequest& request, SocketStream& agent) {
  size_t colon = request.target.rfind(':');
  std::string host = colon == std::string::npos ? request.target : request.target.substr(0, colon);
  int port = 443;
  if (colon != std::string::npos) {
    try {
      port = std::stoi(request.target.substr(colon + 1));
    } catch (...) {
      write_error_response(agent, 400, "Bad Request", "malformed CONNECT target");
      return;
    }
  }

  bool intercept = host_matches_patterns(host, port, session_->config().url_patterns);
  LeafCertificate leaf;
  if (intercept) {
    try {
      leaf = ca_->leaf_for_host(host);
    } catch (const std::exception& e) {
      log_warn("leaf certificate for " + host + " failed (" + e.what() +
               "); tunneling without interception");
      intercept = false;
    }
  }

  if (!intercept) {
    opaque_tunnel(host, port, agent);
    return;
  }

  if (!agent.write_all("HTTP/1.1 200 Connection Established\r\n\r\n")) return;
  int fd = agent.release();
  std::unique_ptr<TlsStream> tls;
  try {
    tls = tls_server_handshake(fd, leaf.cert_pem, leaf.key_pem);
  } catch (const std::exception& e) {
    log_warn("TLS handshake with agent failed for " + host + ": " + e.what());
    return;
  }
  run_tls_session(*tls, host, port);
}

void ProxyServer::run_tls_session(Stream& agent, const std::string& host, int port) {
  BufferedReader reader(agent);
  while (running_) {
    std::optional<HttpRequest> request;
    try {
      request = read_request_head(reader);
      if (!request) return;
      read_request_body(reader, *request);
    } catch (const std::exception& e) {
      log_warn("intercepted session with " + host + ": " + e.what());
      return;
    }
    if (!handle_exchange(*request, agent, "https", host, port)) return;
  }
}

void ProxyServer::opaque_tunnel(const std::string& host, int port, SocketStream& agent) {
  std::unique_ptr<SocketStream> origin;
  try {
    origin = tcp_connect(host, port, settings_.io_timeout_ms);
  } catch (const std::exception& e) {
    write_error_response(agent, 502, "Bad Gateway", e.what());
    return;
  }
  if (!agent.write_all("HTTP/1.1 200 Connection Established\r\n\r\n")) return;

  auto pump = [](int from, int to) {
    char buf[16384];
    while (true) {
      ssize_t n = ::recv(from, buf, sizeof(buf), 0);
      if (n <= 0) break;
      ssize_t off = 0;
      while (off < n) {
        ssize_t sent = ::send(to, buf + off, static_cast<size_t>(n - off), MSG_NOSIGNAL);
        if (sent <= 0) return;
        off += sent;
      }
    }
    ::shutdown(to, SHUT_WR);
    ::shutdown(from, SHUT_RD);
  };

  int agent_fd = agent.fd();
  int origin_fd = origin->fd();
  std::thread downstream(pump, origin_fd, agent_fd);
  pump(agent_fd, origin_fd);
  downstream.join();
}

}  // namespace ipikit
