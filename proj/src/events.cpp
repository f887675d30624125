#include "ipikit/events.hpp"

#include <sstream>

#include "ipikit/util.hpp"

namespace ipikit {

using nlohmann::json;

json injection_event_to_json(const InjectionEvent& event) {
  return json{{"timestamp", format_utc_millis(event.timestamp_ms)},
              {"url", event.url},
              {"payload_id", event.payload_id},
              {"technique", event.technique},
              {"requested_point", event.requested_point},
              {"applied_point", event.applied_point},
              {"fallback_used", event.fallback_used},
              {"altered", event.altered},
              {"session_sequence", event.session_sequence}};
}

std::optional<InjectionEvent> injection_event_from_json(const json& object) {
  try {
    InjectionEvent event;
    auto ts = parse_utc_millis(object.at("timestamp").get<std::string>());
    if (!ts) return std::nullopt;
    event.timestamp_ms = *ts;
    event.url = object.at("url").get<std::string>();
    event.payload_id = object.at("payload_id").get<std::string>();
    event.technique = object.at("technique").get<std::string>();
    event.requested_point = object.at("requested_point").get<std::string>();
    event.applied_point = object.at("applied_point").get<std::string>();
    event.fallback_used = object.at("fallback_used").get<bool>();
    event.altered = object.at("altered").get<bool>();
    event.session_sequence = object.at("session_sequence").get<uint64_t>();
    return event;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

json tracker_event_to_json(const TrackerEvent& event) {
  json query = json::object();
  for (const auto& [key, values] : event.query) query[key] = values;
  json headers = json::object();
  for (const auto& [key, value] : event.headers) headers[key] = value;
  json out{{"timestamp", format_utc_millis(event.timestamp_ms)},
           {"method", event.method},
           {"path", event.path},
           {"query", query},
           {"headers", headers},
           {"client", event.client},
           {"body", event.body},
           {"body_truncated", event.body_truncated}};
  if (event.pid) out["pid"] = *event.pid;
  return out;
}

std::optional<TrackerEvent> tracker_event_from_json(const json& object) {
  try {
    TrackerEvent event;
    auto ts = parse_utc_millis(object.at("timestamp").get<std::string>());
    if (!ts) return std::nullopt;
    event.timestamp_ms = *ts;
    event.method = object.at("method").get<std::string>();
    event.path = object.at("path").get<std::string>();
    for (auto it = object.at("query").begin(); it != object.at("query").end(); ++it) {
      event.query[it.key()] = it.value().get<std::vector<std::string>>();
    }
    for (auto it = object.at("headers").begin(); it != object.at("headers").end(); ++it) {
      event.headers[it.key()] = it.value().get<std::string>();
    }
    event.client = object.at("client").get<std::string>();
    event.body = object.at("body").get<std::string>();
    event.body_truncated = object.at("body_truncated").get<bool>();
    if (object.contains("pid")) event.pid = object.at("pid").get<std::string>();
    return event;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path) : path_(path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  out_.open(path, std::ios::app | std::ios::binary);
  if (!out_) throw Error("cannot open log for append: " + path.string());
}

void JsonlWriter::append(const json& object) {
  std::string line = object.dump();
  line.push_back('\n');
  std::lock_guard<std::mutex> lock(mutex_);
  out_.write(line.data(), static_cast<std::streamsize>(line.size()));
  out_.flush();
  if (!out_) throw Error("log write failed: " + path_.string());
}

namespace {

template <typename Event, typename Parser>
std::vector<Event> read_events_impl(const std::filesystem::path& path, Parser parse,
                                    std::vector<std::string>* warnings) {
  std::string text = read_file(path);
  std::vector<Event> events;
  int line_no = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::optional<Event> event;
    try {
      event = parse(json::parse(line));
    } catch (const json::exception&) {
      event = std::nullopt;
    }
    if (!event) {
      std::string warning =
          path.string() + ":" + std::to_string(line_no) + ": skipping malformed line";
      if (warnings != nullptr) warnings->push_back(warning);
      log_warn(warning);
      continue;
    }
    events.push_back(std::move(*event));
  }
  return events;
}

}  // namespace

std::vector<InjectionEvent> read_injection_events(const std::filesystem::path& path,
                                                  std::vector<std::string>* warnings) {
  return read_events_impl<InjectionEvent>(path, injection_event_from_json, warnings);
}

std::vector<TrackerEvent> read_tracker_events(const std::filesystem::path& path,
                                              std::vector<std::string>* warnings) {
  return read_events_impl<TrackerEvent>(path, tracker_event_from_json, warnings);
}

}  // namespace ipikit
