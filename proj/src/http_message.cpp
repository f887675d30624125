#include "ipikit/http_message.hpp"

#include <algorithm>

#include "ipikit/util.hpp"

namespace ipikit {

std::optional<std::string> HeaderMap::get(std::string_view name) const {
  for (const auto& header : items_) {
    if (iequals(header.name, name)) return header.value;
  }
  return std::nullopt;
}

void HeaderMap::add(std::string_view name, std::string_view value) {
  items_.push_back({std::string(name), std::string(value)});
}

void HeaderMap::set(std::string_view name, std::string_view value) {
  bool replaced = false;
  for (auto it = items_.begin(); it != items_.end();) {
    if (iequals(it->name, name)) {
      if (!replaced) {
        it->value = std::string(value);
        replaced = true;
        ++it;
      } else {
        it = items_.erase(it);
      }
    } else {
      ++it;
    }
  }
  if (!replaced) add(name, value);
}

void HeaderMap::remove(std::string_view name) {
  items_.erase(std::remove_if(items_.begin(), items_.end(),
                              [&](const HttpHeader& h) { return iequals(h.name, name); }),
               items_.end());
}

std::string serialize_request(const HttpRequest& request) {
  std::string out = request.method + " " + request.target + " " + request.version + "\r\n";
  for (const auto& header : request.headers.items()) {
    out += header.name + ": " + header.value + "\r\n";
  }
  out += "\r\n";
  out += request.body;
  return out;
}

std::string serialize_response(const HttpResponse& response) {
  std::string out =
      response.version + " " + std::to_string(response.status) + " " + response.reason + "\r\n";
  for (const auto& header : response.headers.items()) {
    out += header.name + ": " + header.value + "\r\n";
  }
  out += "\r\n";
  out += response.body;
  return out;
}

void strip_hop_by_hop(HeaderMap& headers) {
  static const char* kHopByHop[] = {"Connection",          "Keep-Alive", "Proxy-Authenticate",
                                    "Proxy-Authorization", "TE",         "Trailer",
                                    "Transfer-Encoding",   "Upgrade",    "Proxy-Connection"};
  std::vector<std::string> named;
  if (auto connection = headers.get("Connection")) {
    for (const auto& token : split(*connection, ',')) {
      named.emplace_back(trim(token));
    }
  }
  for (const char* name : kHopByHop) headers.remove(name);
  for (const auto& name : named) {
    if (!name.empty()) headers.remove(name);
  }
}

std::string media_type_of(std::string_view content_type) {
  size_t semi = content_type.find(';');
  return to_lower(trim(content_type.substr(0, semi)));
}

}  // namespace ipikit
