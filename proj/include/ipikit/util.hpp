#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ipikit {

/// Error type thrown across the toolkit. Messages are written for the
/// operator: they name the file, line, or key path that caused the failure.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

// ---- string helpers -------------------------------------------------------

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

/// Collapses each run of internal whitespace to a single space and trims
/// the ends. Case is preserved.
std::string collapse_whitespace(std::string_view s);

std::string replace_all(std::string_view s, std::string_view from, std::string_view to);
std::vector<std::string> split(std::string_view s, char sep);

/// Case-insensitive substring search; npos when absent.
size_t ifind(std::string_view haystack, std::string_view needle, size_t from = 0);

/// RFC 3986 percent-encoding of everything outside the unreserved set.
std::string percent_encode(std::string_view s);

// ---- time -----------------------------------------------------------------

int64_t now_millis();

/// "2026-08-10T12:34:56.789Z" — UTC, millisecond precision.
std::string format_utc_millis(int64_t millis_since_epoch);
std::optional<int64_t> parse_utc_millis(std::string_view text);

// ---- randomness -----------------------------------------------------------

using Rng = std::mt19937_64;

/// Deterministic stream splitting so the selector, technique, and insertion
/// draws stay independent of each other for a given session seed.
uint64_t splitmix64(uint64_t& state);

/// Uniform draw in [0, n) via rejection sampling; stable across platforms.
uint64_t bounded_draw(Rng& rng, uint64_t n);

// ---- files ----------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// ---- diagnostics ----------------------------------------------------------

void log_info(const std::string& message);
void log_warn(const std::string& message);

}  // namespace ipikit
