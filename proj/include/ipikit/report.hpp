#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ipikit/events.hpp"

namespace ipikit {

struct ReportRow {
  std::string payload_id;
  std::string technique;
  std::string applied_point;
  uint64_t injections = 0;
  uint64_t hits = 0;

  bool success() const { return hits > 0; }
};

struct Report {
  std::vector<ReportRow> rows;  // sorted by (payload_id, technique, applied_point)
  uint64_t total_injections = 0;
  uint64_t total_tracker_events = 0;
  /// Tracker events without a pid, with an unknown pid, or outside every
  /// correlation window.
  uint64_t uncorrelated_hits = 0;
};

/// Joins tracker events to injection events on pid. A hit is correlated
/// when its timestamp lies in [injection, injection + timeout_seconds]; a
/// hit matching several injections is attributed to the latest one, so every
/// tracker event counts exactly once.
Report correlate(const std::vector<InjectionEvent>& injections,
                 const std::vector<TrackerEvent>& tracker_events, int timeout_seconds);

nlohmann::json report_row_to_json(const ReportRow& row);
std::string format_report_table(const Report& report);

}  // namespace ipikit
