// Python bindings over the core operations: library handling, wrapping,
// injection, URL matching, config loading, and report correlation. Server
// processes (proxy, tracker) stay behind the CLI.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ipikit/config.hpp"
#include "ipikit/embedding.hpp"
#include "ipikit/events.hpp"
#include "ipikit/injector.hpp"
#include "ipikit/payload_library.hpp"
#include "ipikit/report.hpp"
#include "ipikit/url_match.hpp"

namespace py = pybind11;
using namespace ipikit;

namespace {

Technique technique_from_name(const std::string& name) {
  auto technique = parse_technique(name);
  if (!technique) throw Error("unknown technique \"" + name + "\"");
  return *technique;
}

InsertionPoint point_from_name(const std::string& name) {
  auto point = parse_insertion_point(name);
  if (!point) throw Error("unknown insertion point \"" + name + "\"");
  return *point;
}

RotationMode mode_from_name(const std::string& name) {
  auto mode = parse_rotation_mode(name);
  if (!mode) throw Error("unknown rotation mode \"" + name + "\"");
  return *mode;
}

std::vector<std::pair<std::string, std::string>> substitutions_of(const WrappedBlock& block) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& sub : block.substitutions) out.emplace_back(sub.name, sub.value);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Core operations of the ipikit indirect-prompt-injection toolkit";
  m.attr("__version__") = "0.1.0";

  py::register_exception<Error>(m, "Error");

  py::class_<PayloadRecord>(m, "PayloadRecord")
      .def(py::init([](std::string id, std::string payload, std::string attack_type,
                       std::string domain_context, std::string source_benchmark,
                       std::string severity) {
             PayloadRecord record;
             record.id = std::move(id);
             record.payload = std::move(payload);
             record.attack_type = std::move(attack_type);
             record.domain_context = std::move(domain_context);
             record.source_benchmark = std::move(source_benchmark);
             record.severity = std::move(severity);
             return record;
           }),
           py::arg("id"), py::arg("payload"), py::arg("attack_type"),
           py::arg("domain_context"), py::arg("source_benchmark"), py::arg("severity"))
      .def_readonly("id", &PayloadRecord::id)
      .def_readonly("payload", &PayloadRecord::payload)
      .def_readonly("attack_type", &PayloadRecord::attack_type)
      .def_readonly("domain_context", &PayloadRecord::domain_context)
      .def_readonly("source_benchmark", &PayloadRecord::source_benchmark)
      .def_readonly("severity", &PayloadRecord::severity)
      .def_readonly("source_line", &PayloadRecord::source_line)
      .def("__repr__", [](const PayloadRecord& r) {
        return "<PayloadRecord id='" + r.id + "' attack_type='" + r.attack_type + "'>";
      });

  py::class_<PayloadLibrary>(m, "PayloadLibrary")
      .def_readonly("records", &PayloadLibrary::records)
      .def_readonly("warnings", &PayloadLibrary::warnings)
      .def("__len__", [](const PayloadLibrary& lib) { return lib.size(); })
      .def("find", [](const PayloadLibrary& lib, const std::string& id) -> py::object {
        const PayloadRecord* record = lib.find(id);
        return record == nullptr ? py::none() : py::cast(*record);
      });

  py::class_<PayloadFilter>(m, "PayloadFilter")
      .def(py::init<>())
      .def(py::init([](std::vector<std::string> attack_type,
                       std::vector<std::string> source_benchmark,
                       std::vector<std::string> severity) {
             return PayloadFilter{std::move(attack_type), std::move(source_benchmark),
                                  std::move(severity)};
           }),
           py::arg("attack_type") = std::vector<std::string>{},
           py::arg("source_benchmark") = std::vector<std::string>{},
           py::arg("severity") = std::vector<std::string>{})
      .def_readwrite("attack_type", &PayloadFilter::attack_type)
      .def_readwrite("source_benchmark", &PayloadFilter::source_benchmark)
      .def_readwrite("severity", &PayloadFilter::severity)
      .def("matches", &PayloadFilter::matches);

  m.def("load_library", &load_library, py::arg("path"));
  m.def("load_library_text", &load_library_text, py::arg("text"), py::arg("source_name"));
  m.def("filter_library", &filter_library, py::arg("library"), py::arg("filter"));
  m.def("normalize_payload", &normalize_payload, py::arg("payload"));
  m.def(
      "merge_dedupe",
      [](const std::vector<PayloadLibrary>& libraries) {
        MergeResult result = merge_dedupe(libraries);
        std::vector<std::tuple<std::string, std::string, std::string>> drops;
        for (const auto& row : result.dropped) {
          drops.emplace_back(row.kept_id, row.dropped_id, row.normalized_payload);
        }
        return py::make_tuple(result.library, drops);
      },
      py::arg("libraries"));

  py::class_<Selector>(m, "Selector")
      .def(py::init([](std::vector<PayloadRecord> records, const std::string& mode,
                       std::optional<uint64_t> cap, uint64_t seed) {
             return new Selector(std::move(records), mode_from_name(mode), cap, seed);
           }),
           py::arg("records"), py::arg("mode") = "sequential",
           py::arg("cap") = std::nullopt, py::arg("seed") = 0)
      .def("next",
           [](Selector& selector) -> py::object {
             auto record = selector.next();
             return record ? py::cast(*record) : py::none();
           })
      .def_property_readonly("emitted", &Selector::emitted)
      .def_property_readonly("exhausted", &Selector::exhausted)
      .def("__len__", &Selector::size);

  py::class_<WrappedBlock>(m, "WrappedBlock")
      .def_readonly("text", &WrappedBlock::text)
      .def_property_readonly(
          "technique", [](const WrappedBlock& b) { return technique_name(b.technique); })
      .def_readonly("payload_id", &WrappedBlock::payload_id)
      .def_readonly("payload", &WrappedBlock::payload)
      .def_readonly("altered", &WrappedBlock::altered)
      .def_readonly("llm_fallback", &WrappedBlock::llm_fallback)
      .def_property_readonly("substitutions", &substitutions_of);

  m.def(
      "substitute_placeholders",
      [](const std::string& payload, const std::string& tracker_url,
         const std::string& payload_id) {
        SubstitutionResult result = substitute_placeholders(payload, tracker_url, payload_id);
        std::vector<std::pair<std::string, std::string>> subs;
        for (const auto& sub : result.substitutions) subs.emplace_back(sub.name, sub.value);
        return py::make_tuple(result.text, subs);
      },
      py::arg("payload"), py::arg("tracker_url"), py::arg("payload_id"));

  m.def(
      "wrap",
      [](const std::string& payload, const std::string& technique,
         const std::string& payload_id) {
        return wrap(payload, technique_from_name(technique), payload_id);
      },
      py::arg("payload"), py::arg("technique"), py::arg("payload_id"));

  m.def(
      "build_block",
      [](const std::string& payload, const std::string& payload_id,
         const std::string& technique, const std::string& tracker_url) {
        return build_block(payload, payload_id, technique_from_name(technique), tracker_url);
      },
      py::arg("payload"), py::arg("payload_id"), py::arg("technique"),
      py::arg("tracker_url"));

  py::class_<InjectionResult>(m, "InjectionResult")
      .def_readonly("document", &InjectionResult::document)
      .def_property_readonly(
          "requested_point",
          [](const InjectionResult& r) { return insertion_point_name(r.requested_point); })
      .def_property_readonly(
          "applied_point",
          [](const InjectionResult& r) { return applied_point_name(r.applied_point); })
      .def_readonly("fallback_used", &InjectionResult::fallback_used)
      .def_readonly("altered", &InjectionResult::altered)
      .def_readonly("inserted_text", &InjectionResult::inserted_text);

  m.def(
      "inject",
      [](const std::string& html, const WrappedBlock& block, const std::string& point) {
        return inject(html, block, point_from_name(point));
      },
      py::arg("html"), py::arg("block"), py::arg("point"));

  m.def("strip_block", &strip_block, py::arg("document"), py::arg("block"));
  m.def("script_comment_form",
        [](const std::string& payload) { return script_comment_form(payload); });

  m.def("glob_match", &glob_match, py::arg("pattern"), py::arg("text"));
  m.def("normalize_url_for_match", &normalize_url_for_match, py::arg("url"));
  m.def(
      "match_url",
      [](const std::string& url, const py::object& pattern) {
        if (py::isinstance<py::str>(pattern)) {
          return match_url(url, std::vector<std::string>{pattern.cast<std::string>()});
        }
        return match_url(url, pattern.cast<std::vector<std::string>>());
      },
      py::arg("url"), py::arg("pattern"));

  py::class_<TestConfig>(m, "TestConfig")
      .def(py::init<>())
      .def_readonly("url_patterns", &TestConfig::url_patterns)
      .def_readonly("payload_filter", &TestConfig::payload_filter)
      .def_property_readonly(
          "embedding", [](const TestConfig& c) { return technique_choice_name(c.embedding); })
      .def_property_readonly(
          "insertion_point",
          [](const TestConfig& c) { return insertion_choice_name(c.insertion_point); })
      .def_readonly("exfil_tracker_url", &TestConfig::exfil_tracker_url)
      .def_readonly("timeout_seconds", &TestConfig::timeout_seconds)
      .def_property_readonly(
          "rotation_mode", [](const TestConfig& c) { return rotation_mode_name(c.rotation_mode); })
      .def_readonly("payloads_per_session", &TestConfig::payloads_per_session)
      .def_readonly("seed", &TestConfig::seed)
      .def_readonly("allowed_status", &TestConfig::allowed_status)
      .def_readonly("max_body_bytes", &TestConfig::max_body_bytes)
      .def_readonly("proxy_bind", &TestConfig::proxy_bind)
      .def("__eq__", [](const TestConfig& a, const TestConfig& b) { return a == b; });

  m.def("load_config", &load_config, py::arg("path"));
  m.def("load_config_text", &load_config_text, py::arg("text"), py::arg("source_name"));
  m.def("config_to_yaml", &config_to_yaml, py::arg("config"));

  py::class_<InjectionEvent>(m, "InjectionEvent")
      .def_readonly("timestamp_ms", &InjectionEvent::timestamp_ms)
      .def_readonly("url", &InjectionEvent::url)
      .def_readonly("payload_id", &InjectionEvent::payload_id)
      .def_readonly("technique", &InjectionEvent::technique)
      .def_readonly("requested_point", &InjectionEvent::requested_point)
      .def_readonly("applied_point", &InjectionEvent::applied_point)
      .def_readonly("fallback_used", &InjectionEvent::fallback_used)
      .def_readonly("altered", &InjectionEvent::altered)
      .def_readonly("session_sequence", &InjectionEvent::session_sequence);

  py::class_<TrackerEvent>(m, "TrackerEvent")
      .def_readonly("timestamp_ms", &TrackerEvent::timestamp_ms)
      .def_readonly("method", &TrackerEvent::method)
      .def_readonly("path", &TrackerEvent::path)
      .def_readonly("query", &TrackerEvent::query)
      .def_readonly("pid", &TrackerEvent::pid)
      .def_readonly("headers", &TrackerEvent::headers)
      .def_readonly("client", &TrackerEvent::client)
      .def_readonly("body", &TrackerEvent::body)
      .def_readonly("body_truncated", &TrackerEvent::body_truncated);

  m.def(
      "read_injection_events",
      [](const std::filesystem::path& path) { return read_injection_events(path); },
      py::arg("path"));
  m.def(
      "read_tracker_events",
      [](const std::filesystem::path& path) { return read_tracker_events(path); },
      py::arg("path"));

  py::class_<ReportRow>(m, "ReportRow")
      .def_readonly("payload_id", &ReportRow::payload_id)
      .def_readonly("technique", &ReportRow::technique)
      .def_readonly("applied_point", &ReportRow::applied_point)
      .def_readonly("injections", &ReportRow::injections)
      .def_readonly("hits", &ReportRow::hits)
      .def_property_readonly("success", &ReportRow::success);

  py::class_<Report>(m, "Report")
      .def_readonly("rows", &Report::rows)
      .def_readonly("total_injections", &Report::total_injections)
      .def_readonly("total_tracker_events", &Report::total_tracker_events)
      .def_readonly("uncorrelated_hits", &Report::uncorrelated_hits);

  m.def("correlate", &correlate, py::arg("injections"), py::arg("tracker_events"),
        py::arg("timeout_seconds"));
}
