#include "ipikit/tracker.hpp"

#include <httplib.h>

#include <atomic>
#include <thread>

#include "ipikit/util.hpp"

namespace ipikit {

namespace {

constexpr size_t kHeaderValueLimit = 1024;
constexpr size_t kBodyLimit = 4096;

bool is_track_path(const std::string& path) {
  return path == "/track" || path.rfind("/track/", 0) == 0;
}

TrackerEvent event_from_request(const httplib::Request& req) {
  TrackerEvent event;
  event.timestamp_ms = now_millis();
  event.method = req.method;
  event.path = req.path;
  for (const auto& [key, value] : req.params) {
    event.query[key].push_back(value);
  }
  auto pid = event.query.find("pid");
  if (pid != event.query.end() && !pid->second.empty()) event.pid = pid->second.front();
  for (const auto& [name, value] : req.headers) {
    if (name == "REMOTE_ADDR" || name == "REMOTE_PORT" || name == "LOCAL_ADDR" ||
        name == "LOCAL_PORT") {
      continue;  // httplib pseudo-headers
    }
    std::string truncated = value.size() > kHeaderValueLimit
                                ? value.substr(0, kHeaderValueLimit)
                                : value;
    auto existing = event.headers.find(name);
    if (existing != event.headers.end()) {
      existing->second += ", " + truncated;
      if (existing->second.size() > kHeaderValueLimit) {
        existing->second.resize(kHeaderValueLimit);
      }
    } else {
      event.headers.emplace(name, std::move(truncated));
    }
  }
  event.client = req.remote_addr + ":" + std::to_string(req.remote_port);
  if (req.body.size() > kBodyLimit) {
    event.body = req.body.substr(0, kBodyLimit);
    event.body_truncated = true;
  } else {
    event.body = req.body;
  }
  return event;
}

}  // namespace

struct TrackerServer::Impl {
  TrackerSettings settings;
  httplib::Server server;
  std::unique_ptr<JsonlWriter> log;
  std::thread serve_thread;
  std::atomic<bool> running{false};
  int bound_port = 0;
};

TrackerServer::TrackerServer(TrackerSettings settings) : impl_(std::make_unique<Impl>()) {
  impl_->settings = std::move(settings);
}

TrackerServer::~TrackerServer() { stop(); }

void TrackerServer::start() {
  // Pre-flight: the log must be writable before we answer anything.
  impl_->log = std::make_unique<JsonlWriter>(impl_->settings.log_path);

  auto& server = impl_->server;
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    if (!is_track_path(req.path)) {
      res.status = 404;
      res.set_content("not found\n", "text/plain");
      return;
    }
    try {
      // Logging precedes the response; a 200 implies the line is durable.
      impl_->log->append(tracker_event_to_json(event_from_request(req)));
    } catch (const std::exception& e) {
      log_warn(std::string("tracker log append failed: ") + e.what());
      res.status = 500;
      res.set_content("log write failed\n", "text/plain");
      return;
    }
    res.status = 200;
    res.set_content("ok\n", "text/plain");
  };
  const char* pattern = R"(/.*)";
  server.Get(pattern, handler);
  server.Post(pattern, handler);
  server.Put(pattern, handler);
  server.Patch(pattern, handler);
  server.Delete(pattern, handler);
  server.Options(pattern, handler);

  // httplib's defaults include SO_REUSEPORT, which would let two trackers
  // share a port without an error. Bind failures must be loud.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes),
               sizeof(yes));
  });

  if (impl_->settings.port == 0) {
    impl_->bound_port = server.bind_to_any_port(impl_->settings.bind_host);
    if (impl_->bound_port < 0) {
      throw Error("tracker: cannot bind " + impl_->settings.bind_host);
    }
  } else {
    if (!server.bind_to_port(impl_->settings.bind_host, impl_->settings.port)) {
      throw Error("tracker: cannot bind " + impl_->settings.bind_host + ":" +
                  std::to_string(impl_->settings.port));
    }
    impl_->bound_port = impl_->settings.port;
  }

  impl_->running = true;
  impl_->serve_thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void TrackerServer::stop() {
  if (!impl_->running.exchange(false)) return;
  impl_->server.stop();
  if (impl_->serve_thread.joinable()) impl_->serve_thread.join();
}

int TrackerServer::port() const { return impl_->bound_port; }

const std::filesystem::path& TrackerServer::log_path() const { return impl_->settings.log_path; }

}  // namespace ipikit
