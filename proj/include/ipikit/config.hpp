#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>

#include "ipikit/embedding.hpp"
#include "ipikit/injector.hpp"
#include "ipikit/payload_library.hpp"

namespace ipikit {

/// Resolved four-block test configuration plus the `proxy` extension block.
/// Loaded from YAML; every field has the documented default so an empty
/// document is a complete, valid configuration.
struct TestConfig {
  // target
  std::vector<std::string> url_patterns{"*"};
  // injection
  PayloadFilter payload_filter;
  TechniqueChoice embedding{};
  InsertionChoice insertion_point{};
  // verification
  std::string exfil_tracker_url = "http://localhost:9090/track";
  int timeout_seconds = 30;
  // rotation
  RotationMode rotation_mode = RotationMode::Sequential;
  std::optional<uint64_t> payloads_per_session;
  std::optional<int64_t> seed;
  // proxy
  std::set<int> allowed_status{200};
  uint64_t max_body_bytes = 10485760;
  std::string proxy_bind = "127.0.0.1:8080";

  bool operator==(const TestConfig&) const = default;
};

/// Parses and validates a YAML config. Unknown keys, type mismatches, enum
/// violations, and out-of-range numerics all throw Error naming the full
/// key path. Absent keys take defaults; scalar-or-list fields normalize to
/// lists.
TestConfig load_config(const std::filesystem::path& path);
TestConfig load_config_text(const std::string& text, const std::string& source_name);

/// Canonical echo of the resolved configuration; reloading it reproduces the
/// same TestConfig.
std::string config_to_yaml(const TestConfig& config);

}  // namespace ipikit
