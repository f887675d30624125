#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "ipikit/config.hpp"
#include "ipikit/embedding.hpp"
#include "ipikit/events.hpp"
#include "ipikit/injector.hpp"
#include "ipikit/payload_library.hpp"
#include "support.hpp"

using namespace ipikit;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args) {
  const char* bin = std::getenv("IPIKIT_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "IPIKIT_BIN must point at the built CLI");
  auto dir = ipikit::test::make_temp_dir("cli");
  std::string out_path = (dir / "out").string();
  std::string err_path = (dir / "err").string();
  std::string command = std::string(bin) + " " + args + " >" + out_path + " 2>" + err_path;
  int rc = std::system(command.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  result.out = read_file(out_path);
  result.err = read_file(err_path);
  return result;
}

std::string fixture(const std::string& rel) {
  return (ipikit::test::fixture_dir() / rel).string();
}

std::string sample_library() { return IPIKIT_SAMPLE_LIBRARY; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("validate accepts the example config and echoes the resolution") {
  auto result = run_cli("validate " + fixture("configs/figure.yaml"));
  CHECK(result.exit_code == 0);
  TestConfig echoed = load_config_text(result.out, "echo");
  TestConfig expected = load_config(fixture("configs/figure.yaml"));
  CHECK(echoed == expected);
}

TEST_CASE("validate rejects unknown keys with a non-zero exit") {
  auto result = run_cli("validate " + fixture("configs/typo.yaml"));
  CHECK(result.exit_code != 0);
  CHECK(result.err.find("injection.embeding") != std::string::npos);
}

TEST_CASE("validate of an empty file echoes the defaults") {
  auto result = run_cli("validate " + fixture("configs/empty.yaml"));
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("url_pattern") != std::string::npos);
  CHECK(result.out.find("\"*\"") != std::string::npos);
}

TEST_CASE("inject reproduces the library pipeline byte for byte") {
  auto result = run_cli("inject --page " + fixture("pages/minimal.html") +
                        " --payload bipia-0007 --library " + sample_library() +
                        " --technique html_comment --point head_meta --json");
  CHECK(result.exit_code == 0);

  PayloadLibrary library = load_library(sample_library());
  const PayloadRecord* record = library.find("bipia-0007");
  REQUIRE(record != nullptr);
  WrappedBlock block = build_block(record->payload, record->id, Technique::HtmlComment,
                                   TestConfig{}.exfil_tracker_url);
  std::string page = read_file(ipikit::test::fixture_page("minimal.html"));
  InjectionResult expected = inject(page, block, InsertionPoint::HeadMeta);
  CHECK(result.out == expected.document);

  auto meta = nlohmann::json::parse(result.err.substr(result.err.rfind('\n', result.err.size() - 2) + 1));
  CHECK(meta["applied_point"] == "head_meta");
  CHECK(meta["fallback_used"] == false);
}

TEST_CASE("inject with an unknown payload id fails naming the id") {
  auto result = run_cli("inject --page " + fixture("pages/minimal.html") +
                        " --payload no-such-id --library " + sample_library());
  CHECK(result.exit_code != 0);
  CHECK(result.err.find("no-such-id") != std::string::npos);
}

TEST_CASE("inject respects the config filter when resolving ids") {
  // figure.yaml filters to data_exfil x {bipia, injecagent}; a tensortrust id
  // exists in the library but is outside the filtered view.
  auto result = run_cli("inject --page " + fixture("pages/minimal.html") +
                        " --payload tensortrust-0105 --library " + sample_library() + " -c " +
                        fixture("configs/figure.yaml"));
  CHECK(result.exit_code != 0);
  CHECK(result.err.find("tensortrust-0105") != std::string::npos);
}

TEST_CASE("stats cross-tabulates and honors filters") {
  PayloadLibrary library = load_library(sample_library());

  auto all = run_cli("stats --library " + sample_library() + " --json");
  CHECK(all.exit_code == 0);
  auto last_line = all.out.substr(all.out.rfind('\n', all.out.size() - 2) + 1);
  auto total = nlohmann::json::parse(last_line);
  CHECK(total["total"] == library.size());

  PayloadFilter filter;
  filter.attack_type = {"data_exfil"};
  size_t expected = filter_library(library, filter).size();
  auto filtered = run_cli("stats --library " + sample_library() +
                          " --attack-type data_exfil --json");
  auto filtered_total = nlohmann::json::parse(
      filtered.out.substr(filtered.out.rfind('\n', filtered.out.size() - 2) + 1));
  CHECK(filtered_total["total"] == expected);
}

TEST_CASE("merge dedupes across libraries and writes the drop report") {
  auto dir = ipikit::test::make_temp_dir("merge");
  std::string out = (dir / "merged.jsonl").string();
  std::string drops = (dir / "drops.jsonl").string();
  auto result = run_cli("merge " + fixture("libraries/sample_a.jsonl") + " " +
                        fixture("libraries/sample_b.jsonl") + " -o " + out +
                        " --drop-report " + drops);
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("kept 4") != std::string::npos);
  CHECK(result.out.find("dropped 2") != std::string::npos);

  PayloadLibrary merged = load_library(out);
  CHECK(merged.size() == 4);
  std::string drop_text = read_file(drops);
  CHECK(ipikit::test::count_occurrences(drop_text, "\n") == 2);
  CHECK(drop_text.find("\"kept_id\":\"a-1\"") != std::string::npos);
  CHECK(drop_text.find("\"dropped_id\":\"b-1\"") != std::string::npos);
}

TEST_CASE("report joins logs and prints machine-readable rows") {
  auto dir = ipikit::test::make_temp_dir("report");
  int64_t t0 = 1700000000000;

  InjectionEvent injection;
  injection.timestamp_ms = t0;
  injection.url = "http://o/p";
  injection.payload_id = "bipia-0007";
  injection.technique = "html_comment";
  injection.requested_point = "body_inline";
  injection.applied_point = "body_inline";
  injection.session_sequence = 1;

  TrackerEvent hit;
  hit.timestamp_ms = t0 + 4000;
  hit.method = "GET";
  hit.path = "/track";
  hit.pid = "bipia-0007";
  hit.query["pid"] = {"bipia-0007"};
  hit.client = "127.0.0.1:9";

  TrackerEvent stray = hit;
  stray.pid.reset();
  stray.query.clear();

  {
    std::ofstream events(dir / "injections.jsonl");
    events << injection_event_to_json(injection).dump() << "\n";
    std::ofstream tracker(dir / "tracker.jsonl");
    tracker << tracker_event_to_json(hit).dump() << "\n";
    tracker << tracker_event_to_json(stray).dump() << "\n";
  }

  auto result = run_cli("report --events " + (dir / "injections.jsonl").string() +
                        " --tracker-log " + (dir / "tracker.jsonl").string() + " --json");
  CHECK(result.exit_code == 0);

  std::istringstream lines(result.out);
  std::string first, second;
  std::getline(lines, first);
  std::getline(lines, second);
  auto row = nlohmann::json::parse(first);
  CHECK(row["payload_id"] == "bipia-0007");
  CHECK(row["hits"] == 1);
  CHECK(row["success"] == true);
  auto summary = nlohmann::json::parse(second);
  CHECK(summary["uncorrelated_hits"] == 1);
  CHECK(summary["total_tracker_events"] == 2);
}

TEST_CASE("sweep writes variants and a manifest from the CLI") {
  auto dir = ipikit::test::make_temp_dir("sweepcli");
  auto result = run_cli("sweep --pages " + fixture("pages/minimal.html") + " --out " +
                        (dir / "out").string() + " --library " + sample_library() +
                        " --id bipia-0001 --techniques html_comment --points footer");
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("wrote 1 variants") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "out" / "manifest.jsonl"));
  CHECK(std::filesystem::exists(dir / "out" /
                                "minimal__bipia-0001__html_comment__footer.html"));
}

TEST_CASE("unknown subcommands and missing arguments fail") {
  CHECK(run_cli("frobnicate").exit_code != 0);
  CHECK(run_cli("inject --payload x").exit_code != 0);  // --page is required
  CHECK(run_cli("validate /nonexistent/config.yaml").exit_code != 0);
}

}  // TEST_SUITE
