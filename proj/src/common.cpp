#include "sleepsynth/common.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <system_error>

namespace sleepsynth {

const char* errc_name(errc code) {
  switch (code) {
    case errc::malformed_row: return "MalformedRow";
    case errc::covariate_conflict: return "CovariateConflict";
    case errc::domain_error: return "DomainError";
    case errc::empty_input: return "EmptyInput";
    case errc::shape_mismatch: return "ShapeMismatch";
    case errc::non_finite_gradient: return "NonFiniteGradient";
    case errc::insufficient_data: return "InsufficientData";
    case errc::empty_batch: return "EmptyBatch";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::schema_mismatch: return "SchemaMismatch";
    case errc::empty_group: return "EmptyGroup";
    case errc::codec_mismatch: return "CodecMismatch";
    case errc::io_error: return "IoError";
    case errc::bad_magic: return "BadMagic";
    case errc::version_mismatch: return "VersionMismatch";
    case errc::checksum_mismatch: return "ChecksumMismatch";
    case errc::config_error: return "ConfigError";
  }
  return "UnknownError";
}

namespace {
std::string summarize(const std::vector<LineError>& errors) {
  std::string msg = std::to_string(errors.size()) + " error(s)";
  const std::size_t shown = errors.size() < 10 ? errors.size() : 10;
  for (std::size_t i = 0; i < shown; ++i) {
    msg += "\n  line " + std::to_string(errors[i].line) + ": " +
           errc_name(errors[i].code) + ": " + errors[i].message;
  }
  if (shown < errors.size()) {
    msg += "\n  ... and " + std::to_string(errors.size() - shown) + " more";
  }
  return msg;
}
}  // namespace

ParseError::ParseError(std::vector<LineError> errors)
    : Error(errors.empty() ? errc::malformed_row : errors.front().code, summarize(errors)),
      errors_(std::move(errors)) {}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::io_error, "cannot open " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(errc::io_error, "read failed for " + path.string());
  return content;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(errc::io_error, "cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp, ec);
      throw Error(errc::io_error, "write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(errc::io_error, "rename to " + path.string() + " failed");
  }
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

std::string format_double(double x) {
  char buf[40];
  // Try successively longer forms; the first that round-trips wins.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace sleepsynth
