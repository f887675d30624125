#include "ipikit/content_coding.hpp"

#include <zlib.h>

#include "ipikit/util.hpp"

namespace ipikit {

namespace {

constexpr int kGzipWindowBits = 15 + 16;
constexpr int kZlibWindowBits = 15;
constexpr int kRawWindowBits = -15;
constexpr int kAutoWindowBits = 15 + 32;  // auto-detect gzip or zlib

std::string compress_with(std::string_view data, int window_bits) {
  z_stream strm{};
  if (deflateInit2(&strm, Z_DEFAULT_COMPRESSION, Z_DEFLATED, window_bits, 8,
                   Z_DEFAULT_STRATEGY) != Z_OK) {
    throw Error("zlib: deflateInit2 failed");
  }
  std::string out;
  char buf[16384];
  strm.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  strm.avail_in = static_cast<uInt>(data.size());
  int rc;
  do {
    strm.next_out = reinterpret_cast<Bytef*>(buf);
    strm.avail_out = sizeof(buf);
    rc = deflate(&strm, Z_FINISH);
    out.append(buf, sizeof(buf) - strm.avail_out);
  } while (rc == Z_OK);
  deflateEnd(&strm);
  if (rc != Z_STREAM_END) throw Error("zlib: deflate failed");
  return out;
}

std::optional<std::string> decompress_with(std::string_view data, int window_bits) {
  z_stream strm{};
  if (inflateInit2(&strm, window_bits) != Z_OK) return std::nullopt;
  std::string out;
  char buf[16384];
  strm.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  strm.avail_in = static_cast<uInt>(data.size());
  int rc = Z_OK;
  while (rc == Z_OK) {
    strm.next_out = reinterpret_cast<Bytef*>(buf);
    strm.avail_out = sizeof(buf);
    rc = inflate(&strm, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) break;
    out.append(buf, sizeof(buf) - strm.avail_out);
  }
  inflateEnd(&strm);
  if (rc != Z_STREAM_END) return std::nullopt;
  return out;
}

}  // namespace

std::string gzip_compress(std::string_view data) { return compress_with(data, kGzipWindowBits); }
std::string zlib_compress(std::string_view data) { return compress_with(data, kZlibWindowBits); }

std::optional<std::string> gzip_decompress(std::string_view data) {
  return decompress_with(data, kAutoWindowBits);
}

std::optional<std::string> deflate_decompress(std::string_view data) {
  if (auto out = decompress_with(data, kZlibWindowBits)) return out;
  return decompress_with(data, kRawWindowBits);
}

std::vector<std::string> parse_coding_chain(std::string_view header_value) {
  std::vector<std::string> chain;
  for (const auto& part : split(header_value, ',')) {
    std::string coding = to_lower(trim(part));
    if (!coding.empty()) chain.push_back(std::move(coding));
  }
  return chain;
}

namespace {
bool coding_supported(std::string_view coding) {
  return coding == "identity" || coding == "gzip" || coding == "x-gzip" || coding == "deflate";
}
}  // namespace

bool coding_chain_supported(std::string_view header_value) {
  for (const auto& coding : parse_coding_chain(header_value)) {
    if (!coding_supported(coding)) return false;
  }
  return true;
}

std::optional<std::string> decode_body(std::string_view body, std::string_view header_value) {
  auto chain = parse_coding_chain(header_value);
  std::string current(body);
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    if (*it == "identity") continue;
    std::optional<std::string> decoded;
    if (*it == "gzip" || *it == "x-gzip") {
      decoded = gzip_decompress(current);
    } else if (*it == "deflate") {
      decoded = deflate_decompress(current);
    } else {
      return std::nullopt;
    }
    if (!decoded) return std::nullopt;
    current = std::move(*decoded);
  }
  return current;
}

}  // namespace ipikit
