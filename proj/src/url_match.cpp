#include "ipikit/url_match.hpp"

#include "ipikit/util.hpp"

namespace ipikit {

std::optional<ParsedUrl> parse_absolute_url(std::string_view url) {
  size_t scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos || scheme_end == 0) return std::nullopt;
  ParsedUrl out;
  out.scheme = to_lower(url.substr(0, scheme_end));
  std::string_view rest = url.substr(scheme_end + 3);
  size_t path_start = rest.find('/');
  std::string_view authority = path_start == std::string_view::npos ? rest : rest.substr(0, path_start);
  std::string_view path_query = path_start == std::string_view::npos ? std::string_view{} : rest.substr(path_start);
  if (authority.empty()) return std::nullopt;

  // Strip fragment before splitting the query.
  size_t frag = path_query.find('#');
  if (frag != std::string_view::npos) path_query = path_query.substr(0, frag);

  size_t colon = authority.rfind(':');
  if (colon != std::string_view::npos && authority.find(']') == std::string_view::npos) {
    std::string_view port_text = authority.substr(colon + 1);
    if (port_text.empty()) return std::nullopt;
    int port = 0;
    for (char c : port_text) {
      if (c < '0' || c > '9') return std::nullopt;
      port = port * 10 + (c - '0');
      if (port > 65535) return std::nullopt;
    }
    out.port = port;
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) return std::nullopt;
  out.host = to_lower(authority);

  size_t qmark = path_query.find('?');
  if (qmark == std::string_view::npos) {
    out.path = std::string(path_query);
  } else {
    out.path = std::string(path_query.substr(0, qmark));
    out.query = std::string(path_query.substr(qmark + 1));
  }
  if (out.path.empty()) out.path = "/";
  return out;
}

bool glob_match(std::string_view pattern, std::string_view text) {
  size_t p = 0, t = 0;
  size_t star_p = std::string_view::npos, star_t = 0;
  while (t < text.size()) {
    if (p < pattern.size() && (pattern[p] == text[t] || pattern[p] == '?')) {
      ++p;
      ++t;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star_p = p++;
      star_t = t;
    } else if (star_p != std::string_view::npos) {
      p = star_p + 1;
      t = ++star_t;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

namespace {
int default_port(std::string_view scheme) {
  if (scheme == "http") return 80;
  if (scheme == "https") return 443;
  return -1;
}
}  // namespace

std::string normalize_url_for_match(std::string_view url) {
  auto parsed = parse_absolute_url(url);
  if (!parsed) throw Error("match_url requires an absolute URL, got: " + std::string(url));
  std::string out = parsed->host;
  if (parsed->port != -1 && parsed->port != default_port(parsed->scheme)) {
    out += ':';
    out += std::to_string(parsed->port);
  }
  out += parsed->path;
  return out;
}

bool match_url(std::string_view url, std::string_view pattern) {
  if (pattern == "*") return true;
  return glob_match(pattern, normalize_url_for_match(url));
}

bool match_url(std::string_view url, const std::vector<std::string>& patterns) {
  if (patterns.empty()) throw Error("match_url: empty pattern list");
  for (const auto& pattern : patterns) {
    if (match_url(url, pattern)) return true;
  }
  return false;
}

bool host_matches_patterns(std::string_view host, int port,
                           const std::vector<std::string>& patterns) {
  if (patterns.empty()) throw Error("host_matches_patterns: empty pattern list");
  std::string host_lower = to_lower(host);
  std::string host_port = host_lower + ':' + std::to_string(port);
  for (const auto& pattern : patterns) {
    std::string_view host_part(pattern);
    size_t slash = host_part.find('/');
    if (slash != std::string_view::npos) host_part = host_part.substr(0, slash);
    if (host_part.empty()) continue;
    if (glob_match(host_part, host_lower) || glob_match(host_part, host_port)) return true;
  }
  return false;
}

}  // namespace ipikit
