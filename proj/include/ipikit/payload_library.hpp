#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ipikit/util.hpp"

namespace ipikit {

/// One attack string plus its classification metadata; the unit of the
/// unified library.
struct PayloadRecord {
  std::string id;
  std::string payload;
  std::string attack_type;
  std::string domain_context;
  std::string source_benchmark;
  std::string severity;
  /// Unknown keys from the source JSONL, preserved on round-trip.
  nlohmann::json extra = nlohmann::json::object();
  /// 1-based line in the source file; 0 for synthetic records.
  int source_line = 0;
};

nlohmann::json record_to_json(const PayloadRecord& record);

struct PayloadLibrary {
  std::vector<PayloadRecord> records;
  std::vector<std::string> warnings;

  size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  const PayloadRecord* find(std::string_view id) const;
};

/// Loads a JSONL library, preserving file order. Throws Error naming the
/// offending line on malformed JSON, missing/empty required fields, or
/// duplicate ids. An empty file yields an empty library with a warning.
PayloadLibrary load_library(const std::filesystem::path& path);
PayloadLibrary load_library_text(std::string_view text, const std::string& source_name);

void write_library(const PayloadLibrary& library, const std::filesystem::path& path);

// ---- merge / dedupe --------------------------------------------------------

/// Dedupe key: trimmed payload with internal whitespace runs collapsed to a
/// single space. Case-sensitive.
std::string normalize_payload(std::string_view payload);

struct DropReportRow {
  std::string kept_id;
  std::string dropped_id;
  std::string normalized_payload;
};

struct MergeResult {
  PayloadLibrary library;
  std::vector<DropReportRow> dropped;
};

/// Concatenates the inputs in argument order and drops records whose
/// normalized payload repeats an earlier kept record. Throws on an id shared
/// by two kept records with distinct payloads.
MergeResult merge_dedupe(const std::vector<PayloadLibrary>& libraries);

void write_drop_report(const std::vector<DropReportRow>& rows, const std::filesystem::path& path);

// ---- filtering -------------------------------------------------------------

/// Empty vectors impose no constraint; present vectors are membership sets,
/// conjoined across fields.
struct PayloadFilter {
  std::vector<std::string> attack_type;
  std::vector<std::string> source_benchmark;
  std::vector<std::string> severity;

  bool empty() const {
    return attack_type.empty() && source_benchmark.empty() && severity.empty();
  }
  bool matches(const PayloadRecord& record) const;
  bool operator==(const PayloadFilter&) const = default;
};

std::vector<PayloadRecord> filter_library(const PayloadLibrary& library,
                                          const PayloadFilter& filter);

// ---- rotation --------------------------------------------------------------

enum class RotationMode { Sequential, Random };

const char* rotation_mode_name(RotationMode mode);
std::optional<RotationMode> parse_rotation_mode(std::string_view name);

/// Rotates through a non-empty post-filter record list. Sequential mode
/// cycles in order; random mode draws uniformly with replacement from the
/// seeded generator. Draws are serialized internally and the cap, once hit,
/// makes every further draw return nullopt.
class Selector {
 public:
  Selector(std::vector<PayloadRecord> records, RotationMode mode, std::optional<uint64_t> cap,
           uint64_t seed);

  std::optional<PayloadRecord> next();
  uint64_t emitted() const;
  bool exhausted() const;
  size_t size() const { return records_.size(); }
  RotationMode mode() const { return mode_; }

 private:
  mutable std::mutex mutex_;
  std::vector<PayloadRecord> records_;
  RotationMode mode_;
  std::optional<uint64_t> cap_;
  uint64_t emitted_ = 0;
  Rng rng_;
};

}  // namespace ipikit
