#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

#include <openssl/evp.h>

#include "ipikit/payload_library.hpp"
#include "ipikit/util.hpp"

namespace ipikit::test {

inline std::filesystem::path fixture_dir() {
#ifdef IPIKIT_TEST_DIR
  return std::filesystem::path(IPIKIT_TEST_DIR) / "fixtures";
#else
  return std::filesystem::path("tests/fixtures");
#endif
}

inline std::filesystem::path fixture_page(const std::string& name) {
  return fixture_dir() / "pages" / name;
}

inline std::filesystem::path make_temp_dir(const std::string& tag) {
  std::string tmpl =
      (std::filesystem::temp_directory_path() / ("ipikit-" + tag + "-XXXXXX")).string();
  char* made = mkdtemp(tmpl.data());
  if (made == nullptr) throw Error("mkdtemp failed for " + tmpl);
  return std::filesystem::path(made);
}

inline PayloadRecord make_record(const std::string& id, const std::string& payload,
                                 const std::string& attack_type = "goal_hijack",
                                 const std::string& source = "bipia",
                                 const std::string& severity = "medium") {
  PayloadRecord record;
  record.id = id;
  record.payload = payload;
  record.attack_type = attack_type;
  record.domain_context = "test";
  record.source_benchmark = source;
  record.severity = severity;
  return record;
}

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

inline size_t count_occurrences(std::string_view text, std::string_view needle) {
  size_t count = 0;
  size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string_view::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

}  // namespace ipikit::test
