#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ipikit {

struct HttpHeader {
  std::string name;
  std::string value;
};

/// Ordered header list with case-insensitive name lookup. Order and spelling
/// are preserved so pass-through responses stay as close to the upstream
/// bytes as the hop allows.
class HeaderMap {
 public:
  const std::vector<HttpHeader>& items() const { return items_; }

  std::optional<std::string> get(std::string_view name) const;
  bool has(std::string_view name) const { return get(name).has_value(); }
  void add(std::string_view name, std::string_view value);
  /// Replaces the first occurrence in place and drops any further ones;
  /// appends when absent.
  void set(std::string_view name, std::string_view value);
  void remove(std::string_view name);

 private:
  std::vector<HttpHeader> items_;
};

struct HttpRequest {
  std::string method;
  std::string target;  // as received: absolute-form, origin-form, or authority-form
  std::string version = "HTTP/1.1";
  HeaderMap headers;
  std::string body;
};

struct HttpResponse {
  std::string version = "HTTP/1.1";
  int status = 200;
  std::string reason = "OK";
  HeaderMap headers;
  std::string body;
};

std::string serialize_request(const HttpRequest& request);
std::string serialize_response(const HttpResponse& response);

/// Removes hop-by-hop headers (RFC 7230 §6.1): the fixed set plus anything
/// named by the Connection header.
void strip_hop_by_hop(HeaderMap& headers);

/// Media type from a Content-Type value, lowercased ("text/html; charset=x"
/// -> "text/html").
std::string media_type_of(std::string_view content_type);

}  // namespace ipikit
