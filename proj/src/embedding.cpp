#include "ipikit/embedding.hpp"

#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ipikit/url_match.hpp"

namespace ipikit {

const char* technique_name(Technique technique) {
  switch (technique) {
    case Technique::HtmlComment: return "html_comment";
    case Technique::InvisibleCss: return "invisible_css";
    case Technique::Semantic: return "semantic";
  }
  return "?";
}

std::optional<Technique> parse_technique(std::string_view name) {
  for (Technique t : kAllTechniques) {
    if (name == technique_name(t)) return t;
  }
  return std::nullopt;
}

std::string technique_choice_name(const TechniqueChoice& choice) {
  return choice.random ? "random" : technique_name(choice.fixed);
}

std::optional<TechniqueChoice> parse_technique_choice(std::string_view name) {
  if (name == "random") return TechniqueChoice{true, Technique::HtmlComment};
  if (auto t = parse_technique(name)) return TechniqueChoice{false, *t};
  return std::nullopt;
}

Technique resolve_technique(const TechniqueChoice& choice, Rng& rng) {
  if (!choice.random) return choice.fixed;
  return kAllTechniques[bounded_draw(rng, 3)];
}

SubstitutionResult substitute_placeholders(std::string_view payload,
                                           std::string_view tracker_url,
                                           std::string_view payload_id) {
  static constexpr std::string_view kToken = "{{TRACKER_URL}}";
  SubstitutionResult result;
  std::string value = std::string(tracker_url) + "?pid=" + percent_encode(payload_id);
  result.text = replace_all(payload, kToken, value);
  size_t pos = 0;
  while ((pos = payload.find(kToken, pos)) != std::string_view::npos) {
    result.substitutions.push_back({"TRACKER_URL", value});
    pos += kToken.size();
  }
  return result;
}

namespace {

// Breaks every "--" pair by inserting a space, so the comment body can never
// close the <!-- --> wrapper early.
std::string escape_double_dash(std::string_view payload, bool* altered) {
  std::string out;
  out.reserve(payload.size());
  for (char c : payload) {
    if (c == '-' && !out.empty() && out.back() == '-') {
      out.push_back(' ');
      *altered = true;
    }
    out.push_back(c);
  }
  return out;
}

// Rewrites case-insensitive occurrences of a closing-tag prefix such as
// "</div" to "&lt;" plus the matched tail, preserving the original case.
std::string escape_close_tag(std::string_view payload, std::string_view tag, bool* altered) {
  std::string out;
  out.reserve(payload.size());
  size_t pos = 0;
  while (pos < payload.size()) {
    size_t hit = ifind(payload, tag, pos);
    if (hit == std::string_view::npos) {
      out.append(payload.substr(pos));
      break;
    }
    out.append(payload.substr(pos, hit - pos));
    out.append("&lt;");
    out.append(payload.substr(hit + 1, tag.size() - 1));
    pos = hit + tag.size();
    *altered = true;
  }
  return out;
}

constexpr std::string_view kInvisibleCssOpen =
    "<div style=\"display:none;position:absolute;left:-9999px;font-size:0\" "
    "aria-hidden=\"true\">";
constexpr std::string_view kSemanticOpen = "<p><em>Editor's note:</em> ";

}  // namespace

WrappedBlock wrap(std::string_view payload, Technique technique, std::string_view payload_id) {
  if (trim(payload).empty()) throw Error("wrap: empty payload");

  WrappedBlock block;
  block.technique = technique;
  block.payload_id = std::string(payload_id);
  block.payload = std::string(payload);

  switch (technique) {
    case Technique::HtmlComment: {
      std::string escaped = escape_double_dash(payload, &block.altered);
      block.text = "<!-- " + escaped + " -->";
      break;
    }
    case Technique::InvisibleCss: {
      std::string escaped = escape_close_tag(payload, "</div", &block.altered);
      block.text = std::string(kInvisibleCssOpen) + escaped + "</div>";
      break;
    }
    case Technique::Semantic: {
      std::string escaped = escape_close_tag(payload, "</p", &block.altered);
      block.text = std::string(kSemanticOpen) + escaped + "</p>";
      break;
    }
  }
  return block;
}

CompletionEndpoint completion_endpoint_from_env() {
  CompletionEndpoint endpoint;
  const char* use_llm = std::getenv("USE_LLM");
  endpoint.enabled =
      use_llm != nullptr && (iequals(use_llm, "true") || std::string_view(use_llm) == "1");
  if (const char* url = std::getenv("LLM_ENDPOINT")) endpoint.url = url;
  if (const char* key = std::getenv("LLM_API_KEY")) endpoint.api_key = key;
  if (const char* timeout = std::getenv("LLM_TIMEOUT_SECONDS")) {
    int value = std::atoi(timeout);
    if (value > 0) endpoint.timeout_seconds = value;
  }
  if (endpoint.enabled && endpoint.url.empty()) {
    throw Error("USE_LLM=true but LLM_ENDPOINT is not set");
  }
  return endpoint;
}

namespace {

std::optional<std::string> request_paragraph(const CompletionEndpoint& endpoint,
                                             std::string_view payload) {
  auto parsed = parse_absolute_url(endpoint.url);
  if (!parsed) return std::nullopt;
  std::string base = parsed->scheme + "://" + parsed->host;
  if (parsed->port != -1) base += ":" + std::to_string(parsed->port);
  std::string path = parsed->path;
  if (!parsed->query.empty()) path += "?" + parsed->query;

  httplib::Client client(base);
  client.set_connection_timeout(endpoint.timeout_seconds, 0);
  client.set_read_timeout(endpoint.timeout_seconds, 0);
  httplib::Headers headers;
  if (!endpoint.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + endpoint.api_key);
  }
  nlohmann::json body = {
      {"prompt",
       "Write one plausible editorial paragraph for a web page. It must contain the "
       "following instruction verbatim, character for character, as a contiguous "
       "substring. Return only the paragraph.\n\nInstruction: " +
           std::string(payload)}};
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res || res->status != 200) return std::nullopt;
  try {
    auto parsed_body = nlohmann::json::parse(res->body);
    if (parsed_body.is_object() && parsed_body.contains("text") &&
        parsed_body["text"].is_string()) {
      return parsed_body["text"].get<std::string>();
    }
  } catch (const nlohmann::json::exception&) {
  }
  return std::nullopt;
}

}  // namespace

WrappedBlock wrap_semantic_llm(std::string_view payload, std::string_view payload_id,
                               const CompletionEndpoint& endpoint) {
  if (trim(payload).empty()) throw Error("wrap: empty payload");
  if (!endpoint.enabled) return wrap(payload, Technique::Semantic, payload_id);

  auto paragraph = request_paragraph(endpoint, payload);
  if (paragraph && paragraph->find(payload) != std::string::npos) {
    bool guard_altered = false;
    std::string escaped = escape_close_tag(*paragraph, "</p", &guard_altered);
    if (escaped.find(payload) != std::string::npos) {
      WrappedBlock block;
      block.technique = Technique::Semantic;
      block.payload_id = std::string(payload_id);
      block.payload = std::string(payload);
      block.text = "<p>" + escaped + "</p>";
      block.altered = false;
      return block;
    }
  }

  WrappedBlock block = wrap(payload, Technique::Semantic, payload_id);
  block.llm_fallback = true;
  log_warn("semantic LLM wrap fell back to the deterministic template for payload \"" +
           std::string(payload_id) + "\"");
  return block;
}

WrappedBlock build_block(std::string_view payload, std::string_view payload_id,
                         Technique technique, std::string_view tracker_url,
                         const CompletionEndpoint* endpoint) {
  SubstitutionResult substituted = substitute_placeholders(payload, tracker_url, payload_id);
  WrappedBlock block;
  if (technique == Technique::Semantic && endpoint != nullptr && endpoint->enabled) {
    block = wrap_semantic_llm(substituted.text, payload_id, *endpoint);
  } else {
    block = wrap(substituted.text, technique, payload_id);
  }
  block.substitutions = std::move(substituted.substitutions);
  return block;
}

}  // namespace ipikit
