#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ipikit {

/// One successful splice into one response.
struct InjectionEvent {
  int64_t timestamp_ms = 0;
  std::string url;
  std::string payload_id;
  std::string technique;
  std::string requested_point;
  std::string applied_point;
  bool fallback_used = false;
  bool altered = false;
  uint64_t session_sequence = 0;  // 1-based, gap-free per session
};

nlohmann::json injection_event_to_json(const InjectionEvent& event);
std::optional<InjectionEvent> injection_event_from_json(const nlohmann::json& object);

/// One logged callback request to the tracker endpoint.
struct TrackerEvent {
  int64_t timestamp_ms = 0;
  std::string method;
  std::string path;
  std::map<std::string, std::vector<std::string>> query;
  std::optional<std::string> pid;
  std::map<std::string, std::string> headers;
  std::string client;
  std::string body;
  bool body_truncated = false;
};

nlohmann::json tracker_event_to_json(const TrackerEvent& event);
std::optional<TrackerEvent> tracker_event_from_json(const nlohmann::json& object);

/// Append-only JSONL sink; one whole line per append, flushed before the
/// call returns.
class JsonlWriter {
 public:
  explicit JsonlWriter(const std::filesystem::path& path);
  void append(const nlohmann::json& object);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mutex_;
  std::ofstream out_;
};

/// Reads a JSONL log in file order. Malformed lines are skipped with a
/// warning naming the line number; an unreadable file throws.
std::vector<InjectionEvent> read_injection_events(const std::filesystem::path& path,
                                                  std::vector<std::string>* warnings = nullptr);
std::vector<TrackerEvent> read_tracker_events(const std::filesystem::path& path,
                                              std::vector<std::string>* warnings = nullptr);

}  // namespace ipikit
