#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ipikit {

/// Parsed absolute URL. `port` is -1 when the URL carries no explicit port.
struct ParsedUrl {
  std::string scheme;
  std::string host;  // lowercased
  int port = -1;
  std::string path;  // always starts with '/'
  std::string query;  // without '?', may be empty
};

std::optional<ParsedUrl> parse_absolute_url(std::string_view url);

/// Glob over the full string: '*' matches any run of characters (including
/// '/'), '?' matches exactly one character, everything else is literal.
bool glob_match(std::string_view pattern, std::string_view text);

/// Normalizes an absolute URL to `host[:port]/path` — scheme and query
/// dropped, host lowercased, scheme-default ports (80/443) omitted.
std::string normalize_url_for_match(std::string_view url);

bool match_url(std::string_view url, std::string_view pattern);
bool match_url(std::string_view url, const std::vector<std::string>& patterns);

/// Matches only the host portion of the patterns (everything before the
/// first '/'), against both `host` and `host:port`. Used to decide which
/// CONNECT tunnels are worth intercepting.
bool host_matches_patterns(std::string_view host, int port,
                           const std::vector<std::string>& patterns);

}  // namespace ipikit
