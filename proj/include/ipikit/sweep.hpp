#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ipikit/embedding.hpp"
#include "ipikit/injector.hpp"
#include "ipikit/payload_library.hpp"

namespace ipikit {

/// Cross-product sweep: pages x payloads x techniques x points.
struct SweepSpec {
  std::vector<std::filesystem::path> pages;
  PayloadFilter filter;
  std::vector<std::string> payload_ids;  // optional explicit subset
  std::vector<Technique> techniques;
  std::vector<InsertionPoint> points;
};

struct SweepStats {
  size_t variants = 0;
  std::filesystem::path manifest_path;
};

/// Writes every variant as
///   <page-stem>__<payload_id>__<technique>__<point>.html
/// plus manifest.jsonl (one line per variant), in deterministic order:
/// pages, then payloads (library order), then techniques, then points.
SweepStats run_sweep(const SweepSpec& spec, const PayloadLibrary& library,
                     const std::string& tracker_url, const std::filesystem::path& out_dir);

}  // namespace ipikit
