#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ipikit/util.hpp"

namespace ipikit {

enum class Technique { HtmlComment, InvisibleCss, Semantic };

inline constexpr Technique kAllTechniques[] = {Technique::HtmlComment, Technique::InvisibleCss,
                                               Technique::Semantic};

const char* technique_name(Technique technique);
std::optional<Technique> parse_technique(std::string_view name);

/// Config-level technique: either a fixed variant or "random", which is
/// resolved to a concrete variant per injection.
struct TechniqueChoice {
  bool random = false;
  Technique fixed = Technique::HtmlComment;

  bool operator==(const TechniqueChoice&) const = default;
};

std::string technique_choice_name(const TechniqueChoice& choice);
std::optional<TechniqueChoice> parse_technique_choice(std::string_view name);

Technique resolve_technique(const TechniqueChoice& choice, Rng& rng);

struct Substitution {
  std::string name;
  std::string value;
};

struct SubstitutionResult {
  std::string text;
  std::vector<Substitution> substitutions;
};

/// Replaces every literal `{{TRACKER_URL}}` with
/// `<tracker_url>?pid=<url-encoded payload_id>`.
SubstitutionResult substitute_placeholders(std::string_view payload,
                                           std::string_view tracker_url,
                                           std::string_view payload_id);

struct WrappedBlock {
  std::string text;       // the spliceable string
  Technique technique = Technique::HtmlComment;
  std::string payload_id;
  std::string payload;    // exact payload string the wrapper encloses
  bool altered = false;   // true iff escaping changed the payload text
  std::vector<Substitution> substitutions;
  bool llm_fallback = false;  // semantic LLM mode fell back to the template
};

/// Deterministic wrapping. Escaping keeps the wrapper well formed:
///   html_comment   `--`  -> `- -`
///   invisible_css  `</div` (any case) -> `&lt;` + matched tail
///   semantic       `</p`   (any case) -> `&lt;` + matched tail
WrappedBlock wrap(std::string_view payload, Technique technique, std::string_view payload_id);

/// External text-in/text-out completion endpoint for the opt-in LLM
/// semantic mode. Request: POST JSON {"prompt": ...}; response: JSON
/// {"text": ...}.
struct CompletionEndpoint {
  bool enabled = false;
  std::string url;
  std::string api_key;
  int timeout_seconds = 20;
};

/// Reads USE_LLM / LLM_ENDPOINT / LLM_API_KEY / LLM_TIMEOUT_SECONDS.
/// Throws when the mode is enabled without an endpoint URL.
CompletionEndpoint completion_endpoint_from_env();

/// Asks the endpoint to weave the payload verbatim into a prose paragraph.
/// Any transport error, timeout, or paragraph that fails the verbatim
/// containment check falls back to the deterministic semantic template with
/// llm_fallback set. With the endpoint disabled this equals wrap(...,
/// Technique::Semantic, ...).
WrappedBlock wrap_semantic_llm(std::string_view payload, std::string_view payload_id,
                               const CompletionEndpoint& endpoint);

/// Full payload-to-block path shared by the proxy, the offline injector,
/// and the sweep: placeholder substitution, then wrapping (LLM-backed for
/// semantic when an enabled endpoint is supplied).
WrappedBlock build_block(std::string_view payload, std::string_view payload_id,
                         Technique technique, std::string_view tracker_url,
                         const CompletionEndpoint* endpoint = nullptr);

}  // namespace ipikit
