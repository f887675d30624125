// ipikit command-line entry point: proxy, tracker, offline injection,
// parameter sweep, library utilities, and the success-correlation report.

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ipikit/config.hpp"
#include "ipikit/embedding.hpp"
#include "ipikit/injector.hpp"
#include "ipikit/payload_library.hpp"
#include "ipikit/proxy.hpp"
#include "ipikit/report.hpp"
#include "ipikit/sweep.hpp"
#include "ipikit/tracker.hpp"
#include "ipikit/url_match.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<bool> g_interrupted{false};

void handle_signal(int) { g_interrupted = true; }

void install_signal_handlers() {
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
}

void wait_for_interrupt() {
  while (!g_interrupted) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
}

ipikit::TestConfig load_config_or_defaults(const std::string& path) {
  if (path.empty()) return ipikit::TestConfig{};
  return ipikit::load_config(path);
}

ipikit::PayloadLibrary load_library_logged(const std::string& path) {
  ipikit::PayloadLibrary library = ipikit::load_library(path);
  for (const auto& warning : library.warnings) ipikit::log_warn(warning);
  return library;
}

struct FilterFlags {
  std::vector<std::string> attack_type;
  std::vector<std::string> source_benchmark;
  std::vector<std::string> severity;

  void attach(CLI::App* cmd) {
    cmd->add_option("--attack-type", attack_type, "Filter by attack_type");
    cmd->add_option("--source-benchmark", source_benchmark, "Filter by source_benchmark");
    cmd->add_option("--severity", severity, "Filter by severity");
  }
  bool any() const {
    return !attack_type.empty() || !source_benchmark.empty() || !severity.empty();
  }
  ipikit::PayloadFilter to_filter() const { return {attack_type, source_benchmark, severity}; }
};

// ---- run --------------------------------------------------------------------

struct RunOptions {
  std::string config_path;
  std::string library_path = "payloads/unified.jsonl";
  std::string bind;
  std::string log_dir = ".";
  std::string events_path;
  std::string state_dir = "state";
  int64_t seed = 0;
  bool seed_set = false;
  bool verify_upstream = false;
};

int cmd_run(const RunOptions& opt) {
  ipikit::TestConfig config = load_config_or_defaults(opt.config_path);
  if (!opt.bind.empty()) config.proxy_bind = opt.bind;
  if (opt.seed_set) config.seed = opt.seed;

  ipikit::PayloadLibrary library = load_library_logged(opt.library_path);
  auto filtered = ipikit::filter_library(library, config.payload_filter);
  uint64_t seed = config.seed ? static_cast<uint64_t>(*config.seed)
                              : static_cast<uint64_t>(ipikit::now_millis());
  auto selector = std::make_shared<ipikit::Selector>(filtered, config.rotation_mode,
                                                     config.payloads_per_session, seed);

  fs::path events_path = opt.events_path.empty() ? fs::path(opt.log_dir) / "injections.jsonl"
                                                 : fs::path(opt.events_path);
  ipikit::CompletionEndpoint llm = ipikit::completion_endpoint_from_env();
  auto session = std::make_shared<ipikit::Session>(config, selector, seed, events_path, llm);

  auto [host, port] = ipikit::parse_bind_address(config.proxy_bind);
  ipikit::ProxySettings settings;
  settings.bind_host = host;
  settings.port = port;
  settings.state_dir = opt.state_dir;
  settings.verify_upstream = opt.verify_upstream;
  ipikit::ProxyServer proxy(session, settings);
  proxy.start();

  std::cout << "resolved configuration:\n" << ipikit::config_to_yaml(config);
  std::cout << "session seed: " << seed << "\n";
  std::cout << "CA certificate: " << proxy.ca_certificate_path().string() << "\n";
  std::cout << "injection events: " << events_path.string() << "\n";
  std::cout << "proxy listening on " << host << ":" << proxy.port() << "\n";
  if (llm.enabled) std::cout << "semantic LLM mode enabled via " << llm.url << "\n";
  std::cout.flush();

  install_signal_handlers();
  wait_for_interrupt();
  proxy.stop();

  ipikit::SessionStats stats = proxy.stats();
  std::cout << "\nsession summary:\n";
  std::cout << "  responses seen: " << stats.responses_seen << "\n";
  std::cout << "  modified:       " << stats.modified << "\n";
  uint64_t skipped = 0;
  for (const auto& [reason, count] : stats.skipped) skipped += count;
  std::cout << "  passed through: " << skipped << "\n";
  for (const auto& [reason, count] : stats.skipped) {
    std::cout << "    " << reason << ": " << count << "\n";
  }
  return 0;
}

// ---- track ------------------------------------------------------------------

struct TrackOptions {
  std::string bind = "127.0.0.1:9090";
  std::string log_dir = ".";
  std::string log_path;
};

int cmd_track(const TrackOptions& opt) {
  auto [host, port] = ipikit::parse_bind_address(opt.bind);
  ipikit::TrackerSettings settings;
  settings.bind_host = host;
  settings.port = port;
  settings.log_path = opt.log_path.empty() ? fs::path(opt.log_dir) / "tracker.jsonl"
                                           : fs::path(opt.log_path);
  ipikit::TrackerServer tracker(settings);
  tracker.start();
  std::cout << "tracker listening on " << host << ":" << tracker.port() << "\n";
  std::cout << "tracker log: " << settings.log_path.string() << "\n";
  std::cout.flush();

  install_signal_handlers();
  wait_for_interrupt();
  tracker.stop();
  return 0;
}

// ---- inject -----------------------------------------------------------------

struct InjectOptions {
  std::string page_path;
  std::string payload_id;
  std::string technique;
  std::string point;
  std::string config_path;
  std::string library_path = "payloads/unified.jsonl";
  std::string out_path = "-";
  bool json = false;
};

int cmd_inject(const InjectOptions& opt) {
  ipikit::TestConfig config = load_config_or_defaults(opt.config_path);

  std::string technique_name_arg =
      opt.technique.empty() ? ipikit::technique_choice_name(config.embedding) : opt.technique;
  auto technique = ipikit::parse_technique(technique_name_arg);
  if (!technique) {
    throw ipikit::Error("inject needs a concrete technique, got \"" + technique_name_arg +
                        "\"");
  }
  std::string point_name_arg =
      opt.point.empty() ? ipikit::insertion_choice_name(config.insertion_point) : opt.point;
  auto point = ipikit::parse_insertion_point(point_name_arg);
  if (!point) {
    throw ipikit::Error("inject needs a concrete insertion point, got \"" + point_name_arg +
                        "\"");
  }

  ipikit::PayloadLibrary library = load_library_logged(opt.library_path);
  auto filtered = ipikit::filter_library(library, config.payload_filter);
  const ipikit::PayloadRecord* record = nullptr;
  for (const auto& candidate : filtered) {
    if (candidate.id == opt.payload_id) {
      record = &candidate;
      break;
    }
  }
  if (record == nullptr) {
    throw ipikit::Error("unknown payload id \"" + opt.payload_id +
                        "\" (not in the filtered library)");
  }

  ipikit::CompletionEndpoint llm = ipikit::completion_endpoint_from_env();
  ipikit::WrappedBlock block = ipikit::build_block(record->payload, record->id, *technique,
                                                   config.exfil_tracker_url, &llm);
  std::string page = ipikit::read_file(opt.page_path);
  ipikit::InjectionResult result = ipikit::inject(page, block, *point);

  if (opt.out_path == "-") {
    std::cout << result.document;
    std::cout.flush();
  } else {
    ipikit::write_file(opt.out_path, result.document);
  }

  json meta{{"payload_id", record->id},
            {"technique", ipikit::technique_name(*technique)},
            {"requested_point", ipikit::insertion_point_name(result.requested_point)},
            {"applied_point", ipikit::applied_point_name(result.applied_point)},
            {"fallback_used", result.fallback_used},
            {"altered", result.altered}};
  if (opt.json) {
    std::cerr << meta.dump() << "\n";
  } else {
    std::cerr << "injected " << record->id << " via " << ipikit::technique_name(*technique)
              << " at " << ipikit::applied_point_name(result.applied_point)
              << (result.fallback_used ? " (fallback)" : "")
              << (result.altered ? " (payload altered by escaping)" : "") << "\n";
  }
  return 0;
}

// ---- sweep ------------------------------------------------------------------

struct SweepOptions {
  std::vector<std::string> pages;
  std::string out_dir;
  std::string config_path;
  std::string library_path = "payloads/unified.jsonl";
  FilterFlags filter;
  std::vector<std::string> ids;
  std::vector<std::string> techniques;
  std::vector<std::string> points;
};

int cmd_sweep(const SweepOptions& opt) {
  ipikit::TestConfig config = load_config_or_defaults(opt.config_path);
  ipikit::PayloadLibrary library = load_library_logged(opt.library_path);

  ipikit::SweepSpec spec;
  for (const auto& page : opt.pages) spec.pages.emplace_back(page);
  spec.filter = opt.filter.any() ? opt.filter.to_filter() : config.payload_filter;
  spec.payload_ids = opt.ids;

  if (opt.techniques.empty()) {
    spec.techniques.assign(std::begin(ipikit::kAllTechniques),
                           std::end(ipikit::kAllTechniques));
  } else {
    for (ipikit::Technique t : ipikit::kAllTechniques) {
      for (const auto& name : opt.techniques) {
        if (name == ipikit::technique_name(t)) {
          spec.techniques.push_back(t);
          break;
        }
      }
    }
    if (spec.techniques.size() != opt.techniques.size()) {
      throw ipikit::Error("sweep: unknown technique name in --techniques");
    }
  }
  if (opt.points.empty()) {
    spec.points.assign(ipikit::kAllInsertionPoints.begin(), ipikit::kAllInsertionPoints.end());
  } else {
    for (ipikit::InsertionPoint p : ipikit::kAllInsertionPoints) {
      for (const auto& name : opt.points) {
        if (name == ipikit::insertion_point_name(p)) {
          spec.points.push_back(p);
          break;
        }
      }
    }
    if (spec.points.size() != opt.points.size()) {
      throw ipikit::Error("sweep: unknown insertion point name in --points");
    }
  }

  ipikit::SweepStats stats =
      ipikit::run_sweep(spec, library, config.exfil_tracker_url, opt.out_dir);
  std::cout << "wrote " << stats.variants << " variants to " << opt.out_dir << "\n";
  std::cout << "manifest: " << stats.manifest_path.string() << "\n";
  return 0;
}

// ---- report -----------------------------------------------------------------

struct ReportOptions {
  std::string events_path;
  std::string tracker_path;
  std::string config_path;
  std::string log_dir = ".";
  bool json = false;
};

int cmd_report(const ReportOptions& opt) {
  ipikit::TestConfig config = load_config_or_defaults(opt.config_path);
  fs::path events = opt.events_path.empty() ? fs::path(opt.log_dir) / "injections.jsonl"
                                            : fs::path(opt.events_path);
  fs::path tracker = opt.tracker_path.empty() ? fs::path(opt.log_dir) / "tracker.jsonl"
                                              : fs::path(opt.tracker_path);

  auto injections = ipikit::read_injection_events(events);
  auto hits = ipikit::read_tracker_events(tracker);
  ipikit::Report report = ipikit::correlate(injections, hits, config.timeout_seconds);

  if (opt.json) {
    for (const auto& row : report.rows) {
      std::cout << ipikit::report_row_to_json(row).dump() << "\n";
    }
    json summary{{"total_injections", report.total_injections},
                 {"total_tracker_events", report.total_tracker_events},
                 {"uncorrelated_hits", report.uncorrelated_hits}};
    std::cout << summary.dump() << "\n";
  } else {
    std::cout << ipikit::format_report_table(report);
  }
  return 0;
}

// ---- stats ------------------------------------------------------------------

struct StatsOptions {
  std::string library_path = "payloads/unified.jsonl";
  FilterFlags filter;
  bool json = false;
};

int cmd_stats(const StatsOptions& opt) {
  ipikit::PayloadLibrary library = load_library_logged(opt.library_path);
  auto records = ipikit::filter_library(library, opt.filter.to_filter());

  std::map<std::tuple<std::string, std::string, std::string>, uint64_t> counts;
  for (const auto& record : records) {
    ++counts[{record.attack_type, record.source_benchmark, record.severity}];
  }

  if (opt.json) {
    for (const auto& [key, count] : counts) {
      json row{{"attack_type", std::get<0>(key)},
               {"source_benchmark", std::get<1>(key)},
               {"severity", std::get<2>(key)},
               {"count", count}};
      std::cout << row.dump() << "\n";
    }
    std::cout << json{{"total", records.size()}}.dump() << "\n";
  } else {
    size_t type_w = 11, bench_w = 16, sev_w = 8;
    for (const auto& [key, count] : counts) {
      type_w = std::max(type_w, std::get<0>(key).size());
      bench_w = std::max(bench_w, std::get<1>(key).size());
      sev_w = std::max(sev_w, std::get<2>(key).size());
    }
    auto pad = [](const std::string& s, size_t w) {
      std::string out = s;
      out.resize(w + 2, ' ');
      return out;
    };
    std::cout << pad("attack_type", type_w) << pad("source_benchmark", bench_w)
              << pad("severity", sev_w) << "count\n";
    for (const auto& [key, count] : counts) {
      std::cout << pad(std::get<0>(key), type_w) << pad(std::get<1>(key), bench_w)
                << pad(std::get<2>(key), sev_w) << count << "\n";
    }
    std::cout << "total " << records.size() << "\n";
  }
  return 0;
}

// ---- validate ---------------------------------------------------------------

int cmd_validate(const std::string& config_path) {
  ipikit::TestConfig config = ipikit::load_config(config_path);
  std::cout << ipikit::config_to_yaml(config);
  return 0;
}

// ---- merge ------------------------------------------------------------------

struct MergeOptions {
  std::vector<std::string> inputs;
  std::string out_path;
  std::string drop_report_path;
};

int cmd_merge(const MergeOptions& opt) {
  std::vector<ipikit::PayloadLibrary> libraries;
  for (const auto& input : opt.inputs) libraries.push_back(load_library_logged(input));
  ipikit::MergeResult result = ipikit::merge_dedupe(libraries);
  ipikit::write_library(result.library, opt.out_path);
  if (!opt.drop_report_path.empty()) {
    ipikit::write_drop_report(result.dropped, opt.drop_report_path);
  }
  std::cout << "kept " << result.library.size() << " records, dropped "
            << result.dropped.size() << " duplicates\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ipikit — red-team toolkit for indirect prompt injection over live HTML"};
  app.require_subcommand(1);

  RunOptions run_opt;
  auto* run = app.add_subcommand("run", "Run the intercepting proxy");
  run->add_option("-c,--config", run_opt.config_path, "YAML test configuration");
  run->add_option("--library", run_opt.library_path, "Payload library (JSONL)");
  run->add_option("--bind", run_opt.bind, "Proxy bind host:port (overrides config)");
  run->add_option("--log-dir", run_opt.log_dir, "Directory for default log paths");
  run->add_option("--events", run_opt.events_path, "Injection event log path");
  run->add_option("--state-dir", run_opt.state_dir, "Directory for CA material");
  run->add_option("--seed", run_opt.seed, "Session seed (overrides config)")
      ->each([&run_opt](const std::string&) { run_opt.seed_set = true; });
  run->add_flag("--verify-upstream", run_opt.verify_upstream,
                "Verify upstream TLS certificates when intercepting");

  TrackOptions track_opt;
  auto* track = app.add_subcommand("track", "Run the exfiltration callback tracker");
  track->add_option("--bind", track_opt.bind, "Tracker bind host:port");
  track->add_option("--log-dir", track_opt.log_dir, "Directory for default log paths");
  track->add_option("--log", track_opt.log_path, "Tracker log path");

  InjectOptions inject_opt;
  auto* inject = app.add_subcommand("inject", "Inject one payload into one page offline");
  inject->add_option("--page", inject_opt.page_path, "Input HTML file")->required();
  inject->add_option("--payload", inject_opt.payload_id, "Payload id")->required();
  inject->add_option("--technique", inject_opt.technique,
                     "html_comment | invisible_css | semantic");
  inject->add_option("--point", inject_opt.point, "Insertion point");
  inject->add_option("-c,--config", inject_opt.config_path, "YAML test configuration");
  inject->add_option("--library", inject_opt.library_path, "Payload library (JSONL)");
  inject->add_option("-o,--out", inject_opt.out_path, "Output file ('-' for stdout)");
  inject->add_flag("--json", inject_opt.json, "Machine-readable metadata");

  SweepOptions sweep_opt;
  auto* sweep =
      app.add_subcommand("sweep", "Write the payload x technique x point cross-product");
  sweep->add_option("--pages", sweep_opt.pages, "Input HTML files")->required();
  sweep->add_option("--out", sweep_opt.out_dir, "Output directory")->required();
  sweep->add_option("-c,--config", sweep_opt.config_path, "YAML test configuration");
  sweep->add_option("--library", sweep_opt.library_path, "Payload library (JSONL)");
  sweep_opt.filter.attach(sweep);
  sweep->add_option("--id", sweep_opt.ids, "Explicit payload ids");
  sweep->add_option("--techniques", sweep_opt.techniques, "Technique subset");
  sweep->add_option("--points", sweep_opt.points, "Insertion point subset");

  ReportOptions report_opt;
  auto* report = app.add_subcommand("report", "Correlate injections with tracker callbacks");
  report->add_option("--events", report_opt.events_path, "Injection event log");
  report->add_option("--tracker-log", report_opt.tracker_path, "Tracker log");
  report->add_option("-c,--config", report_opt.config_path, "YAML test configuration");
  report->add_option("--log-dir", report_opt.log_dir, "Directory for default log paths");
  report->add_flag("--json", report_opt.json, "Machine-readable rows");

  StatsOptions stats_opt;
  auto* stats = app.add_subcommand("stats", "Cross-tabulate the payload library");
  stats->add_option("--library", stats_opt.library_path, "Payload library (JSONL)");
  stats_opt.filter.attach(stats);
  stats->add_flag("--json", stats_opt.json, "Machine-readable rows");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Validate a YAML test configuration");
  validate->add_option("config", validate_path, "YAML test configuration")->required();

  MergeOptions merge_opt;
  auto* merge = app.add_subcommand("merge", "Merge libraries, dropping duplicate payloads");
  merge->add_option("inputs", merge_opt.inputs, "Input libraries (JSONL)")->required();
  merge->add_option("-o,--out", merge_opt.out_path, "Merged library path")->required();
  merge->add_option("--drop-report", merge_opt.drop_report_path, "Drop report path (JSONL)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(run)) return cmd_run(run_opt);
    if (app.got_subcommand(track)) return cmd_track(track_opt);
    if (app.got_subcommand(inject)) return cmd_inject(inject_opt);
    if (app.got_subcommand(sweep)) return cmd_sweep(sweep_opt);
    if (app.got_subcommand(report)) return cmd_report(report_opt);
    if (app.got_subcommand(stats)) return cmd_stats(stats_opt);
    if (app.got_subcommand(validate)) return cmd_validate(validate_path);
    if (app.got_subcommand(merge)) return cmd_merge(merge_opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
