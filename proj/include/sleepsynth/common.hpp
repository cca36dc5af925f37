#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sleepsynth {

/// Error codes used across the library. Every failure surfaces as an
/// Error (or ParseError for aggregated row-level problems) carrying one
/// of these codes, so callers can branch without string matching.
enum class errc {
  malformed_row,
  covariate_conflict,
  domain_error,
  empty_input,
  shape_mismatch,
  non_finite_gradient,
  insufficient_data,
  empty_batch,
  length_mismatch,
  schema_mismatch,
  empty_group,
  codec_mismatch,
  io_error,
  bad_magic,
  version_mismatch,
  checksum_mismatch,
  config_error,
};

const char* errc_name(errc code);

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

/// One located problem in a line-oriented input. Line numbers are 1-based
/// and count the header line.
struct LineError {
  std::size_t line = 0;
  errc code = errc::malformed_row;
  std::string message;
};

/// Aggregate of all row-level errors found in one parse pass. The parse
/// walks the whole input before throwing so a caller can list every bad
/// line at once.
class ParseError : public Error {
 public:
  explicit ParseError(std::vector<LineError> errors);

  const std::vector<LineError>& errors() const noexcept { return errors_; }

 private:
  std::vector<LineError> errors_;
};

// ---------------------------------------------------------------------------
// Deterministic random stream.
//
// mt19937_64 output is pinned by the standard; the distribution functions
// below are written out explicitly (rather than using std::*_distribution,
// whose algorithms are implementation-defined) so that a (seed, call
// sequence) pair produces the same bytes on every platform and toolchain.
// ---------------------------------------------------------------------------
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n) via rejection sampling; unbiased for any n >= 1.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t min = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t x = engine_();
      if (x >= min) return x % n;
    }
  }

  /// Uniform integer in [lo, hi], both inclusive.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  /// Normal draw via Box-Muller. Always consumes exactly two engine
  /// outputs and keeps no cached spare, so the stream position is a pure
  /// function of the number of calls.
  double normal(double mean, double sd) {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    constexpr double two_pi = 6.283185307179586476925286766559;
    return mean + sd * r * std::cos(two_pi * u2);
  }

  /// Fisher-Yates shuffle driven by below(); independent of std::shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::string state() const {
    std::ostringstream oss;
    oss << engine_;
    return oss.str();
  }

  void set_state(const std::string& s) {
    std::istringstream iss(s);
    iss >> engine_;
    if (iss.fail()) throw Error(errc::checksum_mismatch, "unreadable RNG state");
  }

  bool operator==(const Rng&) const = default;

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer; used to derive independent sub-seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// FNV-1a 64-bit over a byte range.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Small file and text helpers.
// ---------------------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path);

/// Write-to-temp-then-rename so a failed write never leaves a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Split one CSV line on commas. No quoting: the formats in this project
/// use plain tokens only.
std::vector<std::string_view> split_csv_line(std::string_view line);

/// Strip one trailing '\r' (CRLF input).
std::string_view strip_cr(std::string_view line);

/// Shortest round-trip decimal for a double ("%.17g" trimmed via shorter
/// forms that re-parse exactly).
std::string format_double(double x);

}  // namespace sleepsynth
