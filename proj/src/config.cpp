#include "ipikit/config.hpp"

#include <yaml-cpp/yaml.h>

#include "ipikit/url_match.hpp"

namespace ipikit {

namespace {

std::string joined(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error("config: " + path + ": " + what);
}

void require_map(const YAML::Node& node, const std::string& path) {
  if (!node.IsMap()) fail(path, "must be a mapping");
}

void reject_unknown_keys(const YAML::Node& node, const std::string& path,
                         std::initializer_list<const char*> allowed) {
  for (const auto& entry : node) {
    std::string key;
    try {
      key = entry.first.as<std::string>();
    } catch (const YAML::Exception&) {
      fail(path.empty() ? "(top level)" : path, "non-scalar key");
    }
    bool known = false;
    for (const char* candidate : allowed) {
      if (key == candidate) {
        known = true;
        break;
      }
    }
    if (!known) throw Error("config: unknown key \"" + joined(path, key) + "\"");
  }
}

std::string scalar(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) fail(path, "must be a string");
  return node.as<std::string>();
}

std::vector<std::string> scalar_or_list(const YAML::Node& node, const std::string& path) {
  std::vector<std::string> out;
  if (node.IsScalar()) {
    out.push_back(node.as<std::string>());
  } else if (node.IsSequence()) {
    for (size_t i = 0; i < node.size(); ++i) {
      if (!node[i].IsScalar()) fail(path + "[" + std::to_string(i) + "]", "must be a string");
      out.push_back(node[i].as<std::string>());
    }
  } else {
    fail(path, "must be a string or a list of strings");
  }
  for (size_t i = 0; i < out.size(); ++i) {
    if (trim(out[i]).empty()) fail(path + "[" + std::to_string(i) + "]", "empty value");
  }
  if (out.empty()) fail(path, "empty list");
  return out;
}

int64_t integer(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) fail(path, "must be an integer");
  try {
    return node.as<int64_t>();
  } catch (const YAML::Exception&) {
    fail(path, "must be an integer");
  }
}

int64_t positive_integer(const YAML::Node& node, const std::string& path) {
  int64_t value = integer(node, path);
  if (value <= 0) fail(path, "must be a positive integer");
  return value;
}

void parse_target(const YAML::Node& node, TestConfig& config) {
  require_map(node, "target");
  reject_unknown_keys(node, "target", {"url_pattern"});
  if (node["url_pattern"]) {
    config.url_patterns = scalar_or_list(node["url_pattern"], "target.url_pattern");
  }
}

void parse_filter(const YAML::Node& node, TestConfig& config) {
  require_map(node, "injection.payload_filter");
  reject_unknown_keys(node, "injection.payload_filter",
                      {"attack_type", "source_benchmark", "severity"});
  if (node["attack_type"]) {
    config.payload_filter.attack_type =
        scalar_or_list(node["attack_type"], "injection.payload_filter.attack_type");
  }
  if (node["source_benchmark"]) {
    config.payload_filter.source_benchmark =
        scalar_or_list(node["source_benchmark"], "injection.payload_filter.source_benchmark");
  }
  if (node["severity"]) {
    config.payload_filter.severity =
        scalar_or_list(node["severity"], "injection.payload_filter.severity");
  }
}

void parse_injection(const YAML::Node& node, TestConfig& config) {
  require_map(node, "injection");
  reject_unknown_keys(node, "injection", {"payload_filter", "embedding", "insertion_point"});
  if (node["payload_filter"]) parse_filter(node["payload_filter"], config);
  if (node["embedding"]) {
    std::string name = scalar(node["embedding"], "injection.embedding");
    auto choice = parse_technique_choice(name);
    if (!choice) {
      fail("injection.embedding", "\"" + name +
                                      "\" is not one of html_comment | invisible_css | "
                                      "semantic | random");
    }
    config.embedding = *choice;
  }
  if (node["insertion_point"]) {
    std::string name = scalar(node["insertion_point"], "injection.insertion_point");
    auto choice = parse_insertion_choice(name);
    if (!choice) {
      fail("injection.insertion_point",
           "\"" + name +
               "\" is not one of head_meta | body_top | body_inline | sidebar | footer | "
               "script_comment | random");
    }
    config.insertion_point = *choice;
  }
}

void parse_verification(const YAML::Node& node, TestConfig& config) {
  require_map(node, "verification");
  reject_unknown_keys(node, "verification", {"exfil_tracker_url", "timeout_seconds"});
  if (node["exfil_tracker_url"]) {
    std::string url = scalar(node["exfil_tracker_url"], "verification.exfil_tracker_url");
    auto parsed = parse_absolute_url(url);
    if (!parsed || (parsed->scheme != "http" && parsed->scheme != "https")) {
      fail("verification.exfil_tracker_url", "must be an absolute http(s) URL");
    }
    config.exfil_tracker_url = url;
  }
  if (node["timeout_seconds"]) {
    config.timeout_seconds =
        static_cast<int>(positive_integer(node["timeout_seconds"], "verification.timeout_seconds"));
  }
}

void parse_rotation(const YAML::Node& node, TestConfig& config) {
  require_map(node, "rotation");
  reject_unknown_keys(node, "rotation", {"mode", "payloads_per_session", "seed"});
  if (node["mode"]) {
    std::string name = scalar(node["mode"], "rotation.mode");
    auto mode = parse_rotation_mode(name);
    if (!mode) fail("rotation.mode", "\"" + name + "\" is not one of sequential | random");
    config.rotation_mode = *mode;
  }
  if (node["payloads_per_session"]) {
    config.payloads_per_session = static_cast<uint64_t>(
        positive_integer(node["payloads_per_session"], "rotation.payloads_per_session"));
  }
  if (node["seed"]) {
    config.seed = integer(node["seed"], "rotation.seed");
  }
}

void parse_proxy(const YAML::Node& node, TestConfig& config) {
  require_map(node, "proxy");
  reject_unknown_keys(node, "proxy", {"allowed_status", "max_body_bytes", "bind"});
  if (node["allowed_status"]) {
    const YAML::Node& statuses = node["allowed_status"];
    std::set<int> allowed;
    auto add = [&](const YAML::Node& item, const std::string& path) {
      int64_t code = integer(item, path);
      if (code < 100 || code > 599) fail(path, "HTTP status out of range");
      allowed.insert(static_cast<int>(code));
    };
    if (statuses.IsScalar()) {
      add(statuses, "proxy.allowed_status");
    } else if (statuses.IsSequence()) {
      for (size_t i = 0; i < statuses.size(); ++i) {
        add(statuses[i], "proxy.allowed_status[" + std::to_string(i) + "]");
      }
    } else {
      fail("proxy.allowed_status", "must be an integer or a list of integers");
    }
    if (allowed.empty()) fail("proxy.allowed_status", "empty list");
    config.allowed_status = std::move(allowed);
  }
  if (node["max_body_bytes"]) {
    config.max_body_bytes =
        static_cast<uint64_t>(positive_integer(node["max_body_bytes"], "proxy.max_body_bytes"));
  }
  if (node["bind"]) {
    config.proxy_bind = scalar(node["bind"], "proxy.bind");
  }
}

}  // namespace

TestConfig load_config_text(const std::string& text, const std::string& source_name) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error("config: " + source_name + ": YAML parse error: " + e.what());
  }

  TestConfig config;
  if (root.IsNull() || !root.IsDefined()) return config;
  if (!root.IsMap()) throw Error("config: " + source_name + ": top level must be a mapping");

  reject_unknown_keys(root, "", {"target", "injection", "verification", "rotation", "proxy"});
  if (root["target"]) parse_target(root["target"], config);
  if (root["injection"]) parse_injection(root["injection"], config);
  if (root["verification"]) parse_verification(root["verification"], config);
  if (root["rotation"]) parse_rotation(root["rotation"], config);
  if (root["proxy"]) parse_proxy(root["proxy"], config);
  return config;
}

TestConfig load_config(const std::filesystem::path& path) {
  return load_config_text(read_file(path), path.string());
}

std::string config_to_yaml(const TestConfig& config) {
  YAML::Emitter out;
  auto emit_list = [&](const std::vector<std::string>& values) {
    out << YAML::Flow << YAML::BeginSeq;
    for (const auto& value : values) out << YAML::DoubleQuoted << value;
    out << YAML::EndSeq;
  };

  out << YAML::BeginMap;

  out << YAML::Key << "target" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "url_pattern" << YAML::Value;
  emit_list(config.url_patterns);
  out << YAML::EndMap;

  out << YAML::Key << "injection" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "payload_filter" << YAML::Value << YAML::BeginMap;
  if (!config.payload_filter.attack_type.empty()) {
    out << YAML::Key << "attack_type" << YAML::Value;
    emit_list(config.payload_filter.attack_type);
  }
  if (!config.payload_filter.source_benchmark.empty()) {
    out << YAML::Key << "source_benchmark" << YAML::Value;
    emit_list(config.payload_filter.source_benchmark);
  }
  if (!config.payload_filter.severity.empty()) {
    out << YAML::Key << "severity" << YAML::Value;
    emit_list(config.payload_filter.severity);
  }
  out << YAML::EndMap;
  out << YAML::Key << "embedding" << YAML::Value << technique_choice_name(config.embedding);
  out << YAML::Key << "insertion_point" << YAML::Value
      << insertion_choice_name(config.insertion_point);
  out << YAML::EndMap;

  out << YAML::Key << "verification" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "exfil_tracker_url" << YAML::Value << YAML::DoubleQuoted
      << config.exfil_tracker_url;
  out << YAML::Key << "timeout_seconds" << YAML::Value << config.timeout_seconds;
  out << YAML::EndMap;

  out << YAML::Key << "rotation" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mode" << YAML::Value << rotation_mode_name(config.rotation_mode);
  if (config.payloads_per_session) {
    out << YAML::Key << "payloads_per_session" << YAML::Value << *config.payloads_per_session;
  }
  if (config.seed) {
    out << YAML::Key << "seed" << YAML::Value << *config.seed;
  }
  out << YAML::EndMap;

  out << YAML::Key << "proxy" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "allowed_status" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (int status : config.allowed_status) out << status;
  out << YAML::EndSeq;
  out << YAML::Key << "max_body_bytes" << YAML::Value << config.max_body_bytes;
  out << YAML::Key << "bind" << YAML::Value << YAML::DoubleQuoted << config.proxy_bind;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace ipikit
