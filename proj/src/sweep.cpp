#include "ipikit/sweep.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "ipikit/events.hpp"

namespace ipikit {

namespace {

std::string sanitize_component(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    bool safe = std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-' || c == '.' ||
                c == '_';
    out.push_back(safe ? c : '_');
  }
  return out;
}

}  // namespace

SweepStats run_sweep(const SweepSpec& spec, const PayloadLibrary& library,
                     const std::string& tracker_url, const std::filesystem::path& out_dir) {
  if (spec.pages.empty()) throw Error("sweep: no pages given");
  if (spec.techniques.empty()) throw Error("sweep: no techniques given");
  if (spec.points.empty()) throw Error("sweep: no insertion points given");

  // Payload subset in library order.
  std::vector<PayloadRecord> payloads = filter_library(library, spec.filter);
  if (!spec.payload_ids.empty()) {
    for (const auto& id : spec.payload_ids) {
      bool known = std::any_of(payloads.begin(), payloads.end(),
                               [&](const PayloadRecord& r) { return r.id == id; });
      if (!known) throw Error("sweep: unknown payload id \"" + id + "\" (after filtering)");
    }
    std::erase_if(payloads, [&](const PayloadRecord& r) {
      return std::find(spec.payload_ids.begin(), spec.payload_ids.end(), r.id) ==
             spec.payload_ids.end();
    });
  }
  if (payloads.empty()) throw Error("sweep: filter matched no payloads");

  std::filesystem::create_directories(out_dir);
  SweepStats stats;
  stats.manifest_path = out_dir / "manifest.jsonl";
  std::string manifest;

  for (const auto& page_path : spec.pages) {
    std::string page = read_file(page_path);
    std::string stem = sanitize_component(page_path.stem().string());
    for (const auto& payload : payloads) {
      for (Technique technique : spec.techniques) {
        WrappedBlock block =
            build_block(payload.payload, payload.id, technique, tracker_url);
        for (InsertionPoint point : spec.points) {
          InjectionResult result = inject(page, block, point);
          std::string file_name = stem + "__" + sanitize_component(payload.id) + "__" +
                                  technique_name(technique) + "__" +
                                  insertion_point_name(point) + ".html";
          write_file(out_dir / file_name, result.document);

          nlohmann::json row{{"file", file_name},
                             {"page", page_path.string()},
                             {"payload_id", payload.id},
                             {"technique", technique_name(technique)},
                             {"requested_point", insertion_point_name(point)},
                             {"applied_point", applied_point_name(result.applied_point)},
                             {"fallback_used", result.fallback_used},
                             {"altered", result.altered}};
          manifest += row.dump();
          manifest += "\n";
          ++stats.variants;
        }
      }
    }
  }

  write_file(stats.manifest_path, manifest);
  return stats;
}

}  // namespace ipikit
