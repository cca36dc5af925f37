#include "sleepsynth/temporalize.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace sleepsynth {

const std::array<std::string, kFeatureColumns>& feature_column_names() {
  static const std::array<std::string, kFeatureColumns> names = [] {
    std::array<std::string, kFeatureColumns> n;
    for (int i = 1; i <= kSleepBins; ++i) {
      n[static_cast<std::size_t>(i - 1)] =
          "hour" + std::to_string(i) + "_" + std::to_string((3 + i) % 24);
    }
    n[30] = "age";
    n[31] = "sex";
    n[32] = "day_of_week";
    n[33] = "month";
    return n;
  }();
  return names;
}

SleepVector bin_sleep_minutes(const std::vector<EventRecord>& events) {
  // Clip to the window, sort, merge into disjoint intervals, then add each
  // interval's per-bin overlap. Union semantics: a minute covered by several
  // events still counts once.
  std::vector<std::pair<int, int>> spans;  // [start, end)
  spans.reserve(events.size());
  for (const EventRecord& e : events) {
    const int start = e.start_min;
    const int end = std::min(e.start_min + e.duration_min, kWindowMinutes);
    if (start >= kWindowMinutes || end <= start) continue;
    spans.emplace_back(start, end);
  }
  std::sort(spans.begin(), spans.end());

  SleepVector bins{};
  int cur_start = -1, cur_end = -1;
  auto flush = [&bins](int s, int e) {
    for (int h = s / 60; h <= (e - 1) / 60; ++h) {
      bins[static_cast<std::size_t>(h)] += std::min(e, 60 * (h + 1)) - std::max(s, 60 * h);
    }
  };
  for (const auto& [s, e] : spans) {
    if (cur_start < 0) {
      cur_start = s;
      cur_end = e;
    } else if (s <= cur_end) {
      cur_end = std::max(cur_end, e);
    } else {
      flush(cur_start, cur_end);
      cur_start = s;
      cur_end = e;
    }
  }
  if (cur_start >= 0) flush(cur_start, cur_end);
  return bins;
}

FeatureMatrix build_feature_matrix(const std::vector<PersonDay>& persons) {
  if (persons.empty()) throw Error(errc::empty_input, "build_feature_matrix: no persons");
  FeatureMatrix matrix;
  matrix.rows.resize(persons.size());
  const int n = static_cast<int>(persons.size());
  // Rows are independent; the static schedule writes each row from exactly
  // one thread, so output is identical for any thread count.
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const PersonDay& p = persons[static_cast<std::size_t>(i)];
    FeatureRow& row = matrix.rows[static_cast<std::size_t>(i)];
    row.sleep = bin_sleep_minutes(p.events);
    row.age = p.covariates.age;
    row.sex = p.covariates.sex;
    row.day_of_week = p.covariates.day_of_week;
    row.month = p.covariates.month;
  }
  return matrix;
}

int total_sleep_minutes(const FeatureRow& row) {
  int total = 0;
  for (const int v : row.sleep) total += v;
  return total;
}

void write_matrix_csv(const FeatureMatrix& matrix, std::ostream& out) {
  const auto& names = feature_column_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << names[i] << (i + 1 < names.size() ? ',' : '\n');
  }
  for (const FeatureRow& row : matrix.rows) {
    for (const int v : row.sleep) out << v << ',';
    out << row.age << ',' << sex_token(row.sex) << ',' << day_token(row.day_of_week) << ','
        << month_token(row.month) << '\n';
  }
}

std::string matrix_csv_string(const FeatureMatrix& matrix) {
  std::ostringstream oss;
  write_matrix_csv(matrix, oss);
  return oss.str();
}

namespace {

std::optional<int> parse_int_field(std::string_view token) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) return std::nullopt;
  return value;
}

}  // namespace

FeatureMatrix read_matrix_csv(std::string_view csv_text) {
  const auto& names = feature_column_names();
  std::string expected_header;
  for (std::size_t i = 0; i < names.size(); ++i) {
    expected_header += names[i];
    if (i + 1 < names.size()) expected_header += ',';
  }

  FeatureMatrix matrix;
  std::vector<LineError> errors;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos <= csv_text.size()) {
    const std::size_t nl = csv_text.find('\n', pos);
    std::string_view line = csv_text.substr(pos, nl == std::string_view::npos ? csv_text.size() - pos
                                                                              : nl - pos);
    pos = nl == std::string_view::npos ? csv_text.size() + 1 : nl + 1;
    line = strip_cr(line);
    ++line_no;

    if (!header_seen) {
      if (line != expected_header) {
        throw Error(errc::schema_mismatch, "matrix CSV header does not match the 34-column schema");
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;

    const auto fields = split_csv_line(line);
    if (fields.size() != kFeatureColumns) {
      errors.push_back({line_no, errc::malformed_row,
                        "expected 34 columns, got " + std::to_string(fields.size())});
      continue;
    }

    FeatureRow row;
    bool ok = true;
    for (int i = 0; i < kSleepBins && ok; ++i) {
      const auto v = parse_int_field(fields[static_cast<std::size_t>(i)]);
      if (!v) {
        errors.push_back({line_no, errc::malformed_row, "unparsable sleep value in column " + names[static_cast<std::size_t>(i)]});
        ok = false;
      } else if (*v < 0 || *v > 60) {
        errors.push_back({line_no, errc::domain_error,
                          "sleep value " + std::to_string(*v) + " outside [0, 60] in column " +
                              names[static_cast<std::size_t>(i)]});
        ok = false;
      } else {
        row.sleep[static_cast<std::size_t>(i)] = *v;
      }
    }
    if (!ok) continue;

    const auto age = parse_int_field(fields[30]);
    const auto sex = parse_sex(fields[31]);
    const auto day = parse_day(fields[32]);
    const auto month = parse_month(fields[33]);
    if (!age) {
      errors.push_back({line_no, errc::malformed_row, "unparsable age"});
      continue;
    }
    if (*age < 15 || *age > 120) {
      errors.push_back({line_no, errc::domain_error, "age " + std::to_string(*age) + " outside [15, 120]"});
      continue;
    }
    if (!sex || !day || !month) {
      errors.push_back({line_no, errc::domain_error, "unknown covariate token"});
      continue;
    }
    row.age = *age;
    row.sex = *sex;
    row.day_of_week = *day;
    row.month = *month;
    matrix.rows.push_back(row);
  }

  if (!errors.empty()) throw ParseError(std::move(errors));
  return matrix;
}

FeatureMatrix read_matrix_csv(std::istream& in) {
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return read_matrix_csv(std::string_view(content));
}

}  // namespace sleepsynth
