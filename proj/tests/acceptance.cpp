// Acceptance suite: end-to-end checks over the proxy, tracker, injector,
// library, and CLI. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fail.

#include <httplib.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>
#include <vector>

#include "ipikit/config.hpp"
#include "ipikit/content_coding.hpp"
#include "ipikit/embedding.hpp"
#include "ipikit/injector.hpp"
#include "ipikit/payload_library.hpp"
#include "ipikit/proxy.hpp"
#include "ipikit/report.hpp"
#include "ipikit/tracker.hpp"
#include "support.hpp"

using namespace ipikit;
using ipikit::test::fixture_page;
using ipikit::test::make_record;
using ipikit::test::make_temp_dir;
using ipikit::test::sha256_hex;

namespace {

int g_failures = 0;

void report_criterion(int number, const std::string& name, bool pass,
                      const std::string& detail) {
  std::printf("[%s] criterion %d: %s — %s\n", pass ? "PASS" : "FAIL", number, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void run_criterion(int number, const std::string& name,
                   const std::function<std::pair<bool, std::string>()>& body) {
  try {
    auto [pass, detail] = body();
    report_criterion(number, name, pass, detail);
  } catch (const std::exception& e) {
    report_criterion(number, name, false, std::string("exception: ") + e.what());
  }
}

struct Origin {
  httplib::Server server;
  int port = 0;
  std::thread thread;

  explicit Origin(const std::function<void(httplib::Server&)>& routes) {
    routes(server);
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~Origin() {
    server.stop();
    if (thread.joinable()) thread.join();
  }
};

struct Proxy {
  std::filesystem::path dir;
  std::shared_ptr<Session> session;
  std::unique_ptr<ProxyServer> server;

  Proxy(TestConfig config, std::vector<PayloadRecord> records, uint64_t seed = 1)
      : dir(make_temp_dir("acc-proxy")) {
    auto selector = std::make_shared<Selector>(std::move(records), config.rotation_mode,
                                               config.payloads_per_session, seed);
    session = std::make_shared<Session>(config, selector, seed, dir / "injections.jsonl");
    ProxySettings settings;
    settings.port = 0;
    settings.state_dir = dir / "state";
    server = std::make_unique<ProxyServer>(session, settings);
    server->start();
  }
  ~Proxy() { server->stop(); }

  httplib::Client agent(int origin_port) {
    httplib::Client client("127.0.0.1", origin_port);
    client.set_proxy("127.0.0.1", server->port());
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(10, 0);
    return client;
  }
  std::vector<InjectionEvent> events() const {
    return read_injection_events(dir / "injections.jsonl");
  }
};

const char* kDocPage =
    "<html><head><title>ClientCorp Docs</title></head>"
    "<body><p>Quota API overview.</p><p>Second paragraph.</p></body></html>";

std::string pattern_for(int origin_port, const std::string& suffix = "/*") {
  return "127.0.0.1:" + std::to_string(origin_port) + suffix;
}

// ---- criterion 1 ------------------------------------------------------------

std::pair<bool, std::string> criterion_end_to_end() {
  auto started = std::chrono::steady_clock::now();

  Origin origin([](httplib::Server& server) {
    server.Get("/docs/page1", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kDocPage, "text/html; charset=utf-8");
    });
  });

  auto tracker_dir = make_temp_dir("acc-tracker");
  TrackerServer tracker(TrackerSettings{"127.0.0.1", 9090, tracker_dir / "tracker.jsonl"});
  tracker.start();

  // The example config, with the pattern pointed at the fixture origin and
  // the tracker addressed by IP.
  TestConfig config = load_config(ipikit::test::fixture_dir() / "configs" / "figure.yaml");
  config.url_patterns = {pattern_for(origin.port, "/docs/*")};
  config.exfil_tracker_url = "http://127.0.0.1:9090/track";

  PayloadLibrary library = load_library(IPIKIT_SAMPLE_LIBRARY);
  auto filtered = filter_library(library, config.payload_filter);
  Proxy proxy(config, filtered, 42);

  // Scripted fetcher: fetch through the proxy, then follow the callback URL
  // found in the injected block.
  auto agent = proxy.agent(origin.port);
  auto res = agent.Get("/docs/page1");
  if (!res || res->status != 200) {
    tracker.stop();
    return {false, "fetch through proxy failed"};
  }
  const std::string needle = "http://127.0.0.1:9090/track";
  size_t start = res->body.find(needle);
  if (start == std::string::npos) {
    tracker.stop();
    return {false, "no callback URL found in delivered body"};
  }
  size_t end = start;
  while (end < res->body.size() &&
         std::string_view(" \t\r\n\"'<>()").find(res->body[end]) == std::string_view::npos) {
    ++end;
  }
  std::string callback = res->body.substr(start, end - start);

  httplib::Client callback_client("127.0.0.1", 9090);
  callback_client.set_connection_timeout(5, 0);
  auto cb_res = callback_client.Get(callback.substr(callback.find("/track")));
  if (!cb_res || cb_res->status != 200) {
    tracker.stop();
    return {false, "callback to tracker failed"};
  }
  tracker.stop();

  auto injections = proxy.events();
  auto hits = read_tracker_events(tracker_dir / "tracker.jsonl");
  if (injections.size() != 1) {
    return {false, "expected 1 injection event, saw " + std::to_string(injections.size())};
  }
  if (hits.size() != 1) {
    return {false, "expected 1 tracker event, saw " + std::to_string(hits.size())};
  }
  if (!hits[0].pid || *hits[0].pid != injections[0].payload_id) {
    return {false, "tracker pid does not match the injected payload id"};
  }

  Report report = correlate(injections, hits, config.timeout_seconds);
  bool success = false;
  for (const auto& row : report.rows) {
    if (row.payload_id == injections[0].payload_id && row.success()) success = true;
  }
  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - started)
                     .count();
  if (!success) return {false, "report does not mark the payload successful"};
  if (elapsed >= 5000) return {false, "took " + std::to_string(elapsed) + " ms (>= 5 s)"};
  return {true,
          "1 injection, 1 correlated hit (pid " + injections[0].payload_id + "), report "
          "success=true, " +
              std::to_string(elapsed) + " ms"};
}

// ---- criterion 2 ------------------------------------------------------------

std::pair<bool, std::string> criterion_insertion_table() {
  const std::string full =
      "<html><head><title>t</title></head><body><nav>n</nav><p>p</p>"
      "<aside>a</aside><script>s</script></body></html>";
  const std::string bare = "anchorless text body";

  struct Case {
    InsertionPoint point;
    std::string intermediate_page;
    std::string expect_full;
    std::string expect_intermediate;
  };
  const std::vector<Case> table = {
      {InsertionPoint::HeadMeta, bare, "head_meta", "document_append"},
      {InsertionPoint::BodyTop, bare, "body_top", "document_append"},
      {InsertionPoint::BodyInline, "<html><body>x</body></html>", "body_inline", "body_top"},
      {InsertionPoint::Sidebar, "<html><body>x</body></html>", "sidebar", "footer"},
      {InsertionPoint::Footer, bare, "footer", "document_append"},
      {InsertionPoint::ScriptComment, bare, "script_comment", "document_append"},
  };

  WrappedBlock block = wrap("table conformance probe", Technique::HtmlComment, "t-1");
  int pass = 0, total = 0;
  std::ostringstream failures;
  auto check = [&](const std::string& page, InsertionPoint point, const std::string& expect) {
    ++total;
    auto result = inject(page, block, point);
    bool ok = applied_point_name(result.applied_point) == expect &&
              result.fallback_used == (applied_point_name(result.applied_point) !=
                                       insertion_point_name(point));
    if (ok) {
      ++pass;
    } else {
      failures << " [" << insertion_point_name(point) << " -> "
               << applied_point_name(result.applied_point) << ", wanted " << expect << "]";
    }
  };
  for (const auto& c : table) {
    check(full, c.point, c.expect_full);
    check(c.intermediate_page, c.point, c.expect_intermediate);
    check(bare, c.point, "document_append");
  }
  return {pass == 18 && total == 18,
          std::to_string(pass) + "/18 anchor/fallback cases" + failures.str()};
}

// ---- criterion 3 ------------------------------------------------------------

std::pair<bool, std::string> criterion_pass_through() {
  std::vector<std::string> upstream_bodies;
  Origin origin([&](httplib::Server& server) {
    server.Get(R"(/json/(\d+))", [](const httplib::Request& req, httplib::Response& res) {
      res.set_content("{\"n\":" + req.matches[1].str() + ",\"pad\":\"bytes\"}",
                      "application/json");
    });
    server.Get(R"(/redir/(\d+))", [](const httplib::Request& req, httplib::Response& res) {
      res.status = 302;
      res.set_header("Location", "/elsewhere");
      res.set_content("<html><body>moved " + req.matches[1].str() + "</body></html>",
                      "text/html");
    });
    server.Get(R"(/outside/(\d+))", [](const httplib::Request& req, httplib::Response& res) {
      res.set_content("<html><body>outside " + req.matches[1].str() + "</body></html>",
                      "text/html");
    });
    server.Get(R"(/docs/(\d+))", [](const httplib::Request& req, httplib::Response& res) {
      res.set_content("<html><body><p>doc " + req.matches[1].str() + "</p></body></html>",
                      "text/html");
    });
  });

  TestConfig config;
  config.url_patterns = {pattern_for(origin.port, "/docs/*")};
  config.payloads_per_session = 1;  // exhausted after the first injection
  Proxy proxy(config, {make_record("pt-1", "pass-through probe")});
  auto agent = proxy.agent(origin.port);

  // Consume the budget with one matching fetch (not part of the 20).
  auto warmup = agent.Get("/docs/0");
  if (!warmup || warmup->body.find("pass-through probe") == std::string::npos) {
    return {false, "budget warm-up injection did not happen"};
  }

  int pass = 0, total = 0;
  auto expect_identical = [&](const std::string& path, const std::string& upstream) {
    ++total;
    auto res = agent.Get(path);
    if (res && sha256_hex(res->body) == sha256_hex(upstream)) ++pass;
  };

  for (int i = 0; i < 5; ++i) {
    expect_identical("/json/" + std::to_string(i),
                     "{\"n\":" + std::to_string(i) + ",\"pad\":\"bytes\"}");
  }
  for (int i = 0; i < 5; ++i) {
    expect_identical("/redir/" + std::to_string(i),
                     "<html><body>moved " + std::to_string(i) + "</body></html>");
  }
  for (int i = 0; i < 5; ++i) {
    expect_identical("/outside/" + std::to_string(i),
                     "<html><body>outside " + std::to_string(i) + "</body></html>");
  }
  for (int i = 1; i <= 5; ++i) {  // matching URL + HTML, but budget exhausted
    expect_identical("/docs/" + std::to_string(i),
                     "<html><body><p>doc " + std::to_string(i) + "</p></body></html>");
  }
  return {pass == 20 && total == 20,
          std::to_string(pass) + "/20 bodies hash-equal to upstream"};
}

// ---- criterion 4 ------------------------------------------------------------

std::pair<bool, std::string> criterion_rotation_budget() {
  Origin origin([](httplib::Server& server) {
    server.Get(R"(/page/(\d+))", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kDocPage, "text/html");
    });
  });

  TestConfig config;
  config.url_patterns = {pattern_for(origin.port)};
  config.payloads_per_session = 10;
  Proxy proxy(config,
              {make_record("p1", "rotation probe 1"), make_record("p2", "rotation probe 2"),
               make_record("p3", "rotation probe 3")});
  auto agent = proxy.agent(origin.port);

  int modified = 0, passed_through = 0;
  for (int i = 0; i < 15; ++i) {
    auto res = agent.Get("/page/" + std::to_string(i));
    if (!res) return {false, "fetch " + std::to_string(i) + " failed"};
    if (res->body.find("rotation probe") != std::string::npos) {
      ++modified;
    } else {
      ++passed_through;
    }
  }

  auto events = proxy.events();
  std::vector<std::string> expected = {"p1", "p2", "p3", "p1", "p2",
                                       "p3", "p1", "p2", "p3", "p1"};
  bool sequence_ok = events.size() == 10;
  for (size_t i = 0; sequence_ok && i < events.size(); ++i) {
    sequence_ok = events[i].payload_id == expected[i] && events[i].session_sequence == i + 1;
  }
  bool ok = sequence_ok && modified == 10 && passed_through == 5 &&
            proxy.session->selector().emitted() == 10;
  return {ok, "sequence p1,p2,p3 repeated over " + std::to_string(events.size()) +
                  " events, " + std::to_string(modified) + " modified, " +
                  std::to_string(passed_through) + " passed through"};
}

// ---- criterion 5 ------------------------------------------------------------

std::pair<bool, std::string> criterion_round_trip() {
  const std::vector<std::string> corpus = {
      "blog.html",     "docs.html",  "minimal.html",     "no_head.html",
      "fragment.html", "uppercase.html", "comments.html", "plain.html",
      "attrs.html",    "news.html",  "spa.html",         "xhtml.html",
      "table_layout.html"};
  const std::string payload = "round trip oracle probe 7319";

  int pass = 0, total = 0;
  std::ostringstream failures;
  for (const auto& name : corpus) {
    std::string page = read_file(fixture_page(name));
    for (Technique technique : kAllTechniques) {
      WrappedBlock block = wrap(payload, technique, "rt-1");
      if (page.find(block.text) != std::string::npos) continue;  // oracle inapplicable
      for (InsertionPoint point : kAllInsertionPoints) {
        ++total;
        auto result = inject(page, block, point);
        std::string restored;
        try {
          restored = strip_block(result.document, block);
        } catch (const Error& e) {
          failures << " [" << name << "/" << technique_name(technique) << "/"
                   << insertion_point_name(point) << ": " << e.what() << "]";
          continue;
        }
        if (restored == page) {
          ++pass;
        } else {
          failures << " [" << name << "/" << technique_name(technique) << "/"
                   << insertion_point_name(point) << ": bytes differ]";
        }
      }
    }
  }
  bool ok = pass == total && total >= 10 * 3 * 6;
  return {ok, std::to_string(pass) + "/" + std::to_string(total) +
                  " restorations byte-exact" + failures.str()};
}

// ---- criterion 6 ------------------------------------------------------------

std::pair<bool, std::string> criterion_content_coding() {
  std::string gz_body = gzip_compress(kDocPage);
  std::string deflate_body = zlib_compress(kDocPage);
  std::string br_body = "\x0bfake brotli stream";
  Origin origin([&](httplib::Server& server) {
    server.Get("/gz", [&](const httplib::Request&, httplib::Response& res) {
      res.set_content(gz_body, "text/html");
      res.set_header("Content-Encoding", "gzip");
    });
    server.Get("/deflate", [&](const httplib::Request&, httplib::Response& res) {
      res.set_content(deflate_body, "text/html");
      res.set_header("Content-Encoding", "deflate");
    });
    server.Get("/br", [&](const httplib::Request&, httplib::Response& res) {
      res.set_content(br_body, "text/html");
      res.set_header("Content-Encoding", "br");
    });
  });

  TestConfig config;
  config.url_patterns = {pattern_for(origin.port)};
  Proxy proxy(config, {make_record("cc-1", "coding probe")});
  auto agent = proxy.agent(origin.port);

  int pass = 0;

  // gzip: oracle = independent decompression + offline inject of the same draw
  auto gz_res = agent.Get("/gz");
  WrappedBlock block = build_block("coding probe", "cc-1", Technique::HtmlComment,
                                   config.exfil_tracker_url);
  std::string expected_gz =
      inject(*gzip_decompress(gz_body), block, InsertionPoint::BodyInline).document;
  if (gz_res && gz_res->body == expected_gz && !gz_res->has_header("Content-Encoding") &&
      std::stoul(gz_res->get_header_value("Content-Length")) == gz_res->body.size()) {
    ++pass;
  }

  // deflate: same oracle
  auto deflate_res = agent.Get("/deflate");
  std::string expected_deflate =
      inject(*deflate_decompress(deflate_body), block, InsertionPoint::BodyInline).document;
  if (deflate_res && deflate_res->body == expected_deflate) ++pass;

  // unsupported coding: untouched body, coding header preserved, skip logged
  auto br_res = agent.Get("/br");
  auto stats = proxy.server->stats();
  if (br_res && br_res->body == br_body && br_res->get_header_value("Content-Encoding") == "br" &&
      stats.skipped.count("unsupported_content_encoding") == 1) {
    ++pass;
  }

  return {pass == 3, std::to_string(pass) + "/3 coding behaviors correct"};
}

// ---- criterion 7 ------------------------------------------------------------

std::pair<bool, std::string> criterion_offline_online() {
  const char* bin = std::getenv("IPIKIT_BIN");
  if (bin == nullptr) return {false, "IPIKIT_BIN not set; cannot run the CLI"};

  struct Combo {
    std::string page;
    std::string payload_id;
    Technique technique;
    InsertionPoint point;
  };
  const std::vector<Combo> combos = {
      {"blog.html", "bipia-0007", Technique::HtmlComment, InsertionPoint::BodyInline},
      {"docs.html", "agentdojo-0042", Technique::InvisibleCss, InsertionPoint::Sidebar},
      {"minimal.html", "tensortrust-0105", Technique::Semantic, InsertionPoint::HeadMeta},
      {"no_head.html", "wasp-0006", Technique::HtmlComment, InsertionPoint::ScriptComment},
      {"spa.html", "llmail-0027", Technique::InvisibleCss, InsertionPoint::Footer},
  };

  PayloadLibrary library = load_library(IPIKIT_SAMPLE_LIBRARY);
  int pass = 0;
  std::ostringstream failures;
  for (const auto& combo : combos) {
    std::string page = read_file(fixture_page(combo.page));

    Origin origin([&](httplib::Server& server) {
      server.Get("/fixture", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(page, "text/html");
      });
    });

    TestConfig config;
    config.url_patterns = {pattern_for(origin.port)};
    config.embedding = {false, combo.technique};
    config.insertion_point = {false, combo.point};
    const PayloadRecord* record = library.find(combo.payload_id);
    if (record == nullptr) {
      failures << " [" << combo.payload_id << " missing]";
      continue;
    }
    Proxy proxy(config, {*record});
    auto res = proxy.agent(origin.port).Get("/fixture");
    if (!res) {
      failures << " [" << combo.page << ": proxy fetch failed]";
      continue;
    }

    auto out_dir = make_temp_dir("acc-cli");
    std::string out_file = (out_dir / "offline.html").string();
    std::string command = std::string(bin) + " inject --page " +
                          fixture_page(combo.page).string() + " --payload " +
                          combo.payload_id + " --library " + IPIKIT_SAMPLE_LIBRARY +
                          " --technique " + technique_name(combo.technique) + " --point " +
                          insertion_point_name(combo.point) + " -o " + out_file +
                          " 2>/dev/null";
    if (std::system(command.c_str()) != 0) {
      failures << " [" << combo.page << ": CLI inject failed]";
      continue;
    }
    std::string offline = read_file(out_file);
    if (offline == res->body) {
      ++pass;
    } else {
      failures << " [" << combo.page << ": offline/online bodies differ]";
    }
  }
  return {pass == 5, std::to_string(pass) + "/5 byte-identical" + failures.str()};
}

// ---- criterion 8 ------------------------------------------------------------

std::pair<bool, std::string> criterion_tracker_concurrency() {
  auto dir = make_temp_dir("acc-track");
  TrackerServer tracker(TrackerSettings{"127.0.0.1", 0, dir / "tracker.jsonl"});
  tracker.start();

  constexpr int kThreads = 40;
  constexpr int kPerThread = 5;
  std::atomic<int> ok{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&, t] {
      httplib::Client client("127.0.0.1", tracker.port());
      client.set_connection_timeout(10, 0);
      client.set_read_timeout(10, 0);
      for (int i = 0; i < kPerThread; ++i) {
        std::string pid = "c8-" + std::to_string(t) + "-" + std::to_string(i);
        auto res = client.Post("/track?pid=" + pid, "exfil " + pid, "text/plain");
        if (res && res->status == 200) ++ok;
      }
    });
  }
  for (auto& thread : threads) thread.join();
  tracker.stop();

  std::vector<std::string> warnings;
  auto events = read_tracker_events(dir / "tracker.jsonl", &warnings);

  std::set<std::string> pids;
  for (const auto& event : events) {
    if (event.pid) pids.insert(*event.pid);
  }
  bool pass = ok == kThreads * kPerThread && events.size() == kThreads * kPerThread &&
              warnings.empty() && pids.size() == kThreads * kPerThread;
  return {pass, std::to_string(events.size()) + "/200 parseable lines, " +
                    std::to_string(warnings.size()) + " torn"};
}

// ---- criterion 9 ------------------------------------------------------------

std::pair<bool, std::string> criterion_config_parity() {
  TestConfig figure = load_config(ipikit::test::fixture_dir() / "configs" / "figure.yaml");
  bool figure_ok =
      figure.url_patterns == std::vector<std::string>{"*.clientcorp.com/docs/*"} &&
      figure.payload_filter.attack_type == std::vector<std::string>{"data_exfil"} &&
      figure.payload_filter.source_benchmark ==
          std::vector<std::string>{"bipia", "injecagent"} &&
      figure.embedding == TechniqueChoice{false, Technique::HtmlComment} &&
      figure.insertion_point == InsertionChoice{false, InsertionPoint::BodyInline} &&
      figure.exfil_tracker_url == "http://localhost:9090/track" &&
      figure.timeout_seconds == 30 && figure.rotation_mode == RotationMode::Sequential &&
      figure.payloads_per_session == 10;

  TestConfig defaults = load_config_text("", "empty");
  bool defaults_ok = defaults == TestConfig{} &&
                     defaults.url_patterns == std::vector<std::string>{"*"} &&
                     defaults.embedding == TechniqueChoice{false, Technique::HtmlComment} &&
                     defaults.insertion_point ==
                         InsertionChoice{false, InsertionPoint::BodyInline} &&
                     defaults.exfil_tracker_url == "http://localhost:9090/track" &&
                     defaults.timeout_seconds == 30 &&
                     defaults.rotation_mode == RotationMode::Sequential &&
                     !defaults.payloads_per_session && defaults.allowed_status == std::set<int>{200} &&
                     defaults.max_body_bytes == 10485760;

  std::string detail = std::string("example config ") + (figure_ok ? "ok" : "BAD") +
                       ", empty-file defaults " + (defaults_ok ? "ok" : "BAD");
  return {figure_ok && defaults_ok, detail};
}

// ---- criterion 10 -----------------------------------------------------------

std::pair<bool, std::string> criterion_dedupe_merge() {
  PayloadLibrary a = load_library(ipikit::test::fixture_dir() / "libraries/sample_a.jsonl");
  PayloadLibrary b = load_library(ipikit::test::fixture_dir() / "libraries/sample_b.jsonl");
  size_t input_total = a.size() + b.size();

  MergeResult merged = merge_dedupe({a, b});
  bool size_ok = merged.library.size() == input_total - 2 && merged.dropped.size() == 2;

  MergeResult again = merge_dedupe({merged.library});
  bool fixed_point = again.dropped.empty() && again.library.size() == merged.library.size();
  for (size_t i = 0; fixed_point && i < merged.library.size(); ++i) {
    fixed_point = again.library.records[i].id == merged.library.records[i].id;
  }

  return {size_ok && fixed_point,
          std::to_string(input_total) + " -> " + std::to_string(merged.library.size()) +
              " records, " + std::to_string(merged.dropped.size()) +
              " dropped, re-merge fixed point: " + (fixed_point ? "yes" : "no")};
}

}  // namespace

int main() {
  run_criterion(1, "end-to-end loopback", criterion_end_to_end);
  run_criterion(2, "insertion-point table conformance", criterion_insertion_table);
  run_criterion(3, "pass-through byte-identity", criterion_pass_through);
  run_criterion(4, "rotation and budget", criterion_rotation_budget);
  run_criterion(5, "round-trip oracle", criterion_round_trip);
  run_criterion(6, "content-coding handling", criterion_content_coding);
  run_criterion(7, "offline/online equivalence", criterion_offline_online);
  run_criterion(8, "tracker integrity under concurrency", criterion_tracker_concurrency);
  run_criterion(9, "config defaults and example parity", criterion_config_parity);
  run_criterion(10, "dedupe/merge", criterion_dedupe_merge);

  if (g_failures != 0) {
    std::printf("%d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all 10 criteria passed\n");
  return 0;
}
