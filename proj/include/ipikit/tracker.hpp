#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "ipikit/events.hpp"

namespace ipikit {

struct TrackerSettings {
  std::string bind_host = "127.0.0.1";
  int port = 9090;  // 0 selects an ephemeral port
  std::filesystem::path log_path = "tracker.jsonl";
};

/// Stand-alone exfiltration-callback sink. Any method on /track or a
/// subpath of it is appended to the JSONL log (flushed before the 200 goes
/// out); everything else is a 404 and is not logged.
class TrackerServer {
 public:
  explicit TrackerServer(TrackerSettings settings);
  ~TrackerServer();
  TrackerServer(const TrackerServer&) = delete;
  TrackerServer& operator=(const TrackerServer&) = delete;

  /// Opens the log and binds; throws Error on either. Serves on a
  /// background thread.
  void start();
  void stop();
  int port() const;
  const std::filesystem::path& log_path() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ipikit
