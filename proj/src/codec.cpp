#include "sleepsynth/codec.hpp"

#include <algorithm>
#include <cmath>

namespace sleepsynth {

namespace {

ColumnSpec continuous(std::string name, double lo, double hi) {
  ColumnSpec s;
  s.name = std::move(name);
  s.kind = ColumnSpec::Kind::continuous;
  s.lo = lo;
  s.hi = hi;
  return s;
}

ColumnSpec categorical(std::string name, std::vector<std::string> categories) {
  ColumnSpec s;
  s.name = std::move(name);
  s.kind = ColumnSpec::Kind::categorical;
  s.categories = std::move(categories);
  return s;
}

double encode_continuous(const ColumnSpec& spec, double x) {
  if (x < spec.lo || x > spec.hi) {
    throw Error(errc::domain_error, spec.name + " value " + format_double(x) + " outside [" +
                                        format_double(spec.lo) + ", " + format_double(spec.hi) + "]");
  }
  return 2.0 * (x - spec.lo) / (spec.hi - spec.lo) - 1.0;
}

double decode_continuous(const ColumnSpec& spec, double v) {
  const double x = spec.lo + (v + 1.0) * (spec.hi - spec.lo) / 2.0;
  return std::clamp(x, spec.lo, spec.hi);
}

int argmax_block(std::span<const double> block) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(block.size()); ++i) {
    if (block[static_cast<std::size_t>(i)] > block[static_cast<std::size_t>(best)]) best = i;
  }
  return best;
}

std::vector<std::string> token_list(int count, std::string_view (*token)(int)) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.emplace_back(token(i));
  return out;
}

std::string_view sex_token_i(int i) { return sex_token(static_cast<Sex>(i)); }
std::string_view day_token_i(int i) { return day_token(static_cast<DayOfWeek>(i)); }
std::string_view month_token_i(int i) { return month_token(static_cast<Month>(i)); }

void validate(const Codec& codec) {
  if (codec.specs.size() != kFeatureColumns)
    throw Error(errc::schema_mismatch, "codec does not describe 34 columns");
  int width = 0;
  for (const ColumnSpec& s : codec.specs) {
    if (s.kind == ColumnSpec::Kind::continuous) {
      if (!(s.lo < s.hi)) throw Error(errc::config_error, "column " + s.name + ": lo >= hi");
    } else if (s.categories.size() < 2) {
      throw Error(errc::config_error, "column " + s.name + ": fewer than 2 categories");
    }
    width += s.width();
  }
  if (width != codec.encoded_width)
    throw Error(errc::length_mismatch, "encoded_width does not match specs");
}

}  // namespace

Codec fit_codec(const FeatureMatrix& matrix) {
  if (matrix.rows.empty()) throw Error(errc::empty_input, "fit_codec: empty matrix");
  Codec codec;
  const auto& names = feature_column_names();
  for (int i = 0; i < kSleepBins; ++i) {
    codec.specs.push_back(continuous(names[static_cast<std::size_t>(i)], 0.0, 60.0));
  }
  codec.specs.push_back(continuous(names[30], 15.0, 120.0));
  codec.specs.push_back(categorical(names[31], token_list(kSexCount, sex_token_i)));
  codec.specs.push_back(categorical(names[32], token_list(kDayCount, day_token_i)));
  codec.specs.push_back(categorical(names[33], token_list(kMonthCount, month_token_i)));
  for (const ColumnSpec& s : codec.specs) codec.encoded_width += s.width();
  return codec;
}

std::vector<double> encode(const Codec& codec, const FeatureRow& row) {
  std::vector<double> out(static_cast<std::size_t>(codec.encoded_width), 0.0);
  std::size_t at = 0;
  for (std::size_t col = 0; col < codec.specs.size(); ++col) {
    const ColumnSpec& spec = codec.specs[col];
    if (spec.kind == ColumnSpec::Kind::continuous) {
      const double x = col < kSleepBins ? static_cast<double>(row.sleep[col])
                                        : static_cast<double>(row.age);
      out[at++] = encode_continuous(spec, x);
    } else {
      int index = 0;
      if (col == 31) index = static_cast<int>(row.sex);
      else if (col == 32) index = static_cast<int>(row.day_of_week);
      else index = static_cast<int>(row.month);
      if (index < 0 || index >= spec.width())
        throw Error(errc::domain_error, spec.name + ": unknown category");
      out[at + static_cast<std::size_t>(index)] = 1.0;
      at += static_cast<std::size_t>(spec.width());
    }
  }
  return out;
}

Matrix encode_matrix(const Codec& codec, const FeatureMatrix& matrix) {
  if (matrix.rows.empty()) throw Error(errc::empty_input, "encode_matrix: empty matrix");
  Matrix out(static_cast<int>(matrix.rows.size()), codec.encoded_width);
  const int n = out.rows;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const std::vector<double> v = encode(codec, matrix.rows[static_cast<std::size_t>(i)]);
    std::copy(v.begin(), v.end(), out.row(i));
  }
  return out;
}

FeatureRow decode(const Codec& codec, std::span<const double> encoded) {
  if (static_cast<int>(encoded.size()) != codec.encoded_width) {
    throw Error(errc::length_mismatch, "decode: expected " + std::to_string(codec.encoded_width) +
                                           " values, got " + std::to_string(encoded.size()));
  }
  FeatureRow row;
  std::size_t at = 0;
  for (std::size_t col = 0; col < codec.specs.size(); ++col) {
    const ColumnSpec& spec = codec.specs[col];
    if (spec.kind == ColumnSpec::Kind::continuous) {
      const double x = decode_continuous(spec, encoded[at++]);
      // Sleep minutes and age are integral in the schema.
      if (col < kSleepBins) {
        row.sleep[col] = static_cast<int>(std::lround(x));
      } else {
        row.age = static_cast<int>(std::lround(x));
      }
    } else {
      const int width = spec.width();
      const int index = argmax_block(encoded.subspan(at, static_cast<std::size_t>(width)));
      if (col == 31) row.sex = static_cast<Sex>(index);
      else if (col == 32) row.day_of_week = static_cast<DayOfWeek>(index);
      else row.month = static_cast<Month>(index);
      at += static_cast<std::size_t>(width);
    }
  }
  return row;
}

FeatureMatrix decode_matrix(const Codec& codec, const Matrix& encoded) {
  if (encoded.cols != codec.encoded_width)
    throw Error(errc::length_mismatch, "decode_matrix: wrong width");
  FeatureMatrix out;
  out.rows.resize(static_cast<std::size_t>(encoded.rows));
  const int n = encoded.rows;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    out.rows[static_cast<std::size_t>(i)] =
        decode(codec, std::span<const double>(encoded.row(i), static_cast<std::size_t>(encoded.cols)));
  }
  return out;
}

nlohmann::json codec_to_json(const Codec& codec) {
  nlohmann::json specs = nlohmann::json::array();
  for (const ColumnSpec& s : codec.specs) {
    nlohmann::json j;
    j["name"] = s.name;
    if (s.kind == ColumnSpec::Kind::continuous) {
      j["kind"] = "continuous";
      j["lo"] = s.lo;
      j["hi"] = s.hi;
    } else {
      j["kind"] = "categorical";
      j["categories"] = s.categories;
    }
    specs.push_back(std::move(j));
  }
  return nlohmann::json{{"specs", std::move(specs)}, {"encoded_width", codec.encoded_width}};
}

Codec codec_from_json(const nlohmann::json& j) {
  Codec codec;
  try {
    for (const auto& sj : j.at("specs")) {
      ColumnSpec s;
      s.name = sj.at("name").get<std::string>();
      const std::string kind = sj.at("kind").get<std::string>();
      if (kind == "continuous") {
        s.kind = ColumnSpec::Kind::continuous;
        s.lo = sj.at("lo").get<double>();
        s.hi = sj.at("hi").get<double>();
      } else if (kind == "categorical") {
        s.kind = ColumnSpec::Kind::categorical;
        s.categories = sj.at("categories").get<std::vector<std::string>>();
      } else {
        throw Error(errc::config_error, "unknown column kind '" + kind + "'");
      }
      codec.specs.push_back(std::move(s));
    }
    codec.encoded_width = j.at("encoded_width").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::config_error, std::string("bad codec JSON: ") + e.what());
  }
  validate(codec);
  return codec;
}

void save_codec(const Codec& codec, const std::filesystem::path& path) {
  write_file_atomic(path, codec_to_json(codec).dump(2) + "\n");
}

Codec load_codec(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::config_error, "cannot parse codec JSON at " + path.string() + ": " + e.what());
  }
  return codec_from_json(j);
}

std::uint64_t codec_hash(const Codec& codec) {
  const std::string s = codec_to_json(codec).dump();
  return fnv1a64(s.data(), s.size());
}

}  // namespace sleepsynth
