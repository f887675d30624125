#include "ipikit/payload_library.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace ipikit {

using nlohmann::json;

namespace {

const char* kRequiredFields[] = {"id",             "payload",  "attack_type",
                                 "domain_context", "source_benchmark", "severity"};

std::string line_ref(const std::string& source, int line) {
  return source + ":" + std::to_string(line);
}

}  // namespace

json record_to_json(const PayloadRecord& record) {
  json out = json::object();
  out["id"] = record.id;
  out["payload"] = record.payload;
  out["attack_type"] = record.attack_type;
  out["domain_context"] = record.domain_context;
  out["source_benchmark"] = record.source_benchmark;
  out["severity"] = record.severity;
  if (record.extra.is_object()) {
    for (auto it = record.extra.begin(); it != record.extra.end(); ++it) {
      out[it.key()] = it.value();
    }
  }
  return out;
}

const PayloadRecord* PayloadLibrary::find(std::string_view id) const {
  for (const auto& record : records) {
    if (record.id == id) return &record;
  }
  return nullptr;
}

PayloadLibrary load_library_text(std::string_view text, const std::string& source_name) {
  PayloadLibrary library;
  std::unordered_map<std::string, int> seen_ids;  // id -> line

  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view line =
        eol == std::string_view::npos ? text.substr(pos) : text.substr(pos, eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (trim(line).empty()) continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(line_ref(source_name, line_no) + ": invalid JSON: " + e.what());
    }
    if (!obj.is_object()) {
      throw Error(line_ref(source_name, line_no) + ": line is not a JSON object");
    }

    PayloadRecord record;
    record.source_line = line_no;
    for (const char* field : kRequiredFields) {
      auto it = obj.find(field);
      if (it == obj.end()) {
        throw Error(line_ref(source_name, line_no) + ": missing required field \"" +
                    field + "\"");
      }
      if (!it->is_string() || trim(it->get<std::string>()).empty()) {
        throw Error(line_ref(source_name, line_no) + ": required field \"" + field +
                    "\" must be a non-empty string");
      }
    }
    record.id = obj["id"].get<std::string>();
    record.payload = obj["payload"].get<std::string>();
    record.attack_type = obj["attack_type"].get<std::string>();
    record.domain_context = obj["domain_context"].get<std::string>();
    record.source_benchmark = obj["source_benchmark"].get<std::string>();
    record.severity = obj["severity"].get<std::string>();
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool required = std::any_of(std::begin(kRequiredFields), std::end(kRequiredFields),
                                  [&](const char* f) { return it.key() == f; });
      if (!required) record.extra[it.key()] = it.value();
    }

    auto [existing, inserted] = seen_ids.emplace(record.id, line_no);
    if (!inserted) {
      throw Error(source_name + ": duplicate id \"" + record.id + "\" on lines " +
                  std::to_string(existing->second) + " and " + std::to_string(line_no));
    }
    library.records.push_back(std::move(record));
  }

  if (library.records.empty()) {
    library.warnings.push_back(source_name + ": library is empty");
  }
  return library;
}

PayloadLibrary load_library(const std::filesystem::path& path) {
  return load_library_text(read_file(path), path.string());
}

void write_library(const PayloadLibrary& library, const std::filesystem::path& path) {
  std::ostringstream out;
  for (const auto& record : library.records) {
    out << record_to_json(record).dump() << "\n";
  }
  write_file(path, out.str());
}

std::string normalize_payload(std::string_view payload) {
  return collapse_whitespace(payload);
}

MergeResult merge_dedupe(const std::vector<PayloadLibrary>& libraries) {
  if (libraries.empty()) throw Error("merge_dedupe: at least one input library required");

  MergeResult result;
  std::unordered_map<std::string, size_t> kept_by_payload;  // normalized payload -> index
  std::unordered_map<std::string, size_t> kept_by_id;       // id -> index

  for (const auto& library : libraries) {
    for (const auto& record : library.records) {
      std::string normalized = normalize_payload(record.payload);
      auto dup = kept_by_payload.find(normalized);
      if (dup != kept_by_payload.end()) {
        result.dropped.push_back(
            {result.library.records[dup->second].id, record.id, normalized});
        continue;
      }
      auto clash = kept_by_id.find(record.id);
      if (clash != kept_by_id.end()) {
        throw Error("merge_dedupe: id collision on \"" + record.id +
                    "\" with distinct payloads");
      }
      size_t index = result.library.records.size();
      kept_by_payload.emplace(std::move(normalized), index);
      kept_by_id.emplace(record.id, index);
      result.library.records.push_back(record);
    }
  }
  return result;
}

void write_drop_report(const std::vector<DropReportRow>& rows,
                       const std::filesystem::path& path) {
  std::ostringstream out;
  for (const auto& row : rows) {
    json line = {{"kept_id", row.kept_id},
                 {"dropped_id", row.dropped_id},
                 {"normalized_payload", row.normalized_payload}};
    out << line.dump() << "\n";
  }
  write_file(path, out.str());
}

bool PayloadFilter::matches(const PayloadRecord& record) const {
  auto member = [](const std::vector<std::string>& set, const std::string& value) {
    return set.empty() || std::find(set.begin(), set.end(), value) != set.end();
  };
  return member(attack_type, record.attack_type) &&
         member(source_benchmark, record.source_benchmark) &&
         member(severity, record.severity);
}

std::vector<PayloadRecord> filter_library(const PayloadLibrary& library,
                                          const PayloadFilter& filter) {
  std::vector<PayloadRecord> out;
  for (const auto& record : library.records) {
    if (filter.matches(record)) out.push_back(record);
  }
  return out;
}

const char* rotation_mode_name(RotationMode mode) {
  return mode == RotationMode::Sequential ? "sequential" : "random";
}

std::optional<RotationMode> parse_rotation_mode(std::string_view name) {
  if (name == "sequential") return RotationMode::Sequential;
  if (name == "random") return RotationMode::Random;
  return std::nullopt;
}

Selector::Selector(std::vector<PayloadRecord> records, RotationMode mode,
                   std::optional<uint64_t> cap, uint64_t seed)
    : records_(std::move(records)), mode_(mode), cap_(cap), rng_(seed) {
  if (records_.empty()) throw Error("filter matched no payloads");
}

std::optional<PayloadRecord> Selector::next() {
  std::lock_guard<std::mutex> lock(mutex_);
  if (cap_ && emitted_ >= *cap_) return std::nullopt;
  size_t index = mode_ == RotationMode::Sequential
                     ? static_cast<size_t>(emitted_ % records_.size())
                     : static_cast<size_t>(bounded_draw(rng_, records_.size()));
  ++emitted_;
  return records_[index];
}

uint64_t Selector::emitted() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return emitted_;
}

bool Selector::exhausted() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return cap_ && emitted_ >= *cap_;
}

}  // namespace ipikit
