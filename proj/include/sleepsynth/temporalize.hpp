#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "sleepsynth/events.hpp"

namespace sleepsynth {

inline constexpr int kSleepBins = 30;
inline constexpr int kFeatureColumns = 34;  // 30 sleep bins + age, sex, day_of_week, month

/// Minutes asleep per one-hour bin; bin h covers window minutes
/// [60*h, 60*(h+1)). Each value lies in [0, 60].
using SleepVector = std::array<int, kSleepBins>;

/// One cross-sectional record: the 30 hourly sleep summaries plus covariates.
struct FeatureRow {
  SleepVector sleep{};
  int age = 0;
  Sex sex = Sex::female;
  DayOfWeek day_of_week = DayOfWeek::Mon;
  Month month = Month::Jan;

  bool operator==(const FeatureRow&) const = default;
};

struct FeatureMatrix {
  std::vector<FeatureRow> rows;

  bool operator==(const FeatureMatrix&) const = default;
};

/// The 34 column names: hour1_4 .. hour30_9 (bin i carries clock label
/// (3 + i) mod 24, so the first hour is 4am and label 0 means midnight),
/// then age, sex, day_of_week, month.
const std::array<std::string, kFeatureColumns>& feature_column_names();

/// Minutes covered by at least one event per hourly bin. Overlapping
/// events count each minute once; minutes at or beyond 1800 are discarded.
SleepVector bin_sleep_minutes(const std::vector<EventRecord>& events);

/// One row per PersonDay, in input order.
FeatureMatrix build_feature_matrix(const std::vector<PersonDay>& persons);

/// Sum of the 30 sleep bins; in [0, 1800].
int total_sleep_minutes(const FeatureRow& row);

void write_matrix_csv(const FeatureMatrix& matrix, std::ostream& out);
std::string matrix_csv_string(const FeatureMatrix& matrix);

/// Parse a feature-matrix CSV. Throws SchemaMismatch if the header is not
/// exactly the 34 column names, ParseError for any invalid data row.
FeatureMatrix read_matrix_csv(std::string_view csv_text);
FeatureMatrix read_matrix_csv(std::istream& in);

}  // namespace sleepsynth
