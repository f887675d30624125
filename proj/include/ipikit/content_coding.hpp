#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ipikit {

std::string gzip_compress(std::string_view data);
std::string zlib_compress(std::string_view data);

std::optional<std::string> gzip_decompress(std::string_view data);
/// HTTP "deflate" is zlib-wrapped; some servers send raw deflate, which is
/// tried as a fallback.
std::optional<std::string> deflate_decompress(std::string_view data);

/// Lowercased, trimmed codings from a Content-Encoding header value.
std::vector<std::string> parse_coding_chain(std::string_view header_value);

/// True when every member of the chain is identity, gzip/x-gzip, or deflate.
bool coding_chain_supported(std::string_view header_value);

/// Decodes a body through the whole chain (applied in reverse declaration
/// order). nullopt when the chain is unsupported or decoding fails.
std::optional<std::string> decode_body(std::string_view body, std::string_view header_value);

}  // namespace ipikit
