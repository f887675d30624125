#include "ipikit/report.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

namespace ipikit {

Report correlate(const std::vector<InjectionEvent>& injections,
                 const std::vector<TrackerEvent>& tracker_events, int timeout_seconds) {
  Report report;
  report.total_injections = injections.size();
  report.total_tracker_events = tracker_events.size();

  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, ReportRow> rows;
  for (const auto& injection : injections) {
    Key key{injection.payload_id, injection.technique, injection.applied_point};
    auto& row = rows[key];
    if (row.injections == 0) {
      row.payload_id = injection.payload_id;
      row.technique = injection.technique;
      row.applied_point = injection.applied_point;
    }
    ++row.injections;
  }

  const int64_t window_ms = static_cast<int64_t>(timeout_seconds) * 1000;
  for (const auto& hit : tracker_events) {
    const InjectionEvent* attributed = nullptr;
    if (hit.pid) {
      for (const auto& injection : injections) {
        if (injection.payload_id != *hit.pid) continue;
        if (hit.timestamp_ms < injection.timestamp_ms ||
            hit.timestamp_ms > injection.timestamp_ms + window_ms) {
          continue;
        }
        if (attributed == nullptr || injection.timestamp_ms > attributed->timestamp_ms) {
          attributed = &injection;
        }
      }
    }
    if (attributed == nullptr) {
      ++report.uncorrelated_hits;
      continue;
    }
    Key key{attributed->payload_id, attributed->technique, attributed->applied_point};
    ++rows[key].hits;
  }

  report.rows.reserve(rows.size());
  for (auto& [key, row] : rows) report.rows.push_back(std::move(row));
  return report;
}

nlohmann::json report_row_to_json(const ReportRow& row) {
  return nlohmann::json{{"payload_id", row.payload_id},
                        {"technique", row.technique},
                        {"applied_point", row.applied_point},
                        {"injections", row.injections},
                        {"hits", row.hits},
                        {"success", row.success()}};
}

std::string format_report_table(const Report& report) {
  size_t id_width = 10, tech_width = 9, point_width = 13;
  for (const auto& row : report.rows) {
    id_width = std::max(id_width, row.payload_id.size());
    tech_width = std::max(tech_width, row.technique.size());
    point_width = std::max(point_width, row.applied_point.size());
  }

  std::ostringstream out;
  auto pad = [&](const std::string& text, size_t width) {
    out << text;
    for (size_t i = text.size(); i < width + 2; ++i) out << ' ';
  };
  pad("payload_id", id_width);
  pad("technique", tech_width);
  pad("applied_point", point_width);
  out << "injections  hits  success\n";
  for (const auto& row : report.rows) {
    pad(row.payload_id, id_width);
    pad(row.technique, tech_width);
    pad(row.applied_point, point_width);
    std::string injections = std::to_string(row.injections);
    std::string hits = std::to_string(row.hits);
    out << injections;
    for (size_t i = injections.size(); i < 12; ++i) out << ' ';
    out << hits;
    for (size_t i = hits.size(); i < 6; ++i) out << ' ';
    out << (row.success() ? "yes" : "no") << "\n";
  }
  out << "\ninjections: " << report.total_injections
      << "  tracker events: " << report.total_tracker_events
      << "  uncorrelated hits: " << report.uncorrelated_hits << "\n";
  return out.str();
}

}  // namespace ipikit
