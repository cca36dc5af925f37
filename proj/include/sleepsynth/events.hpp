#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sleepsynth/common.hpp"

namespace sleepsynth {

// The observation window: 1800 minutes (30 hours) starting at 4:00am.
inline constexpr int kWindowMinutes = 1800;

enum class Sex : std::uint8_t { female, male };
enum class DayOfWeek : std::uint8_t { Mon, Tue, Wed, Thu, Fri, Sat, Sun };
enum class Month : std::uint8_t { Jan, Feb, Mar, Apr, May, Jun, Jul, Aug, Sep, Oct, Nov, Dec };

inline constexpr int kSexCount = 2;
inline constexpr int kDayCount = 7;
inline constexpr int kMonthCount = 12;

std::string_view sex_token(Sex s);
std::string_view day_token(DayOfWeek d);
std::string_view month_token(Month m);

std::optional<Sex> parse_sex(std::string_view token);
std::optional<DayOfWeek> parse_day(std::string_view token);
std::optional<Month> parse_month(std::string_view token);

inline bool is_weekday(DayOfWeek d) { return d != DayOfWeek::Sat && d != DayOfWeek::Sun; }

/// One timed activity episode. start_min counts minutes since 4:00am of
/// the reference day; the episode covers [start_min, start_min + duration_min).
struct EventRecord {
  std::string person_id;
  std::string activity;
  int start_min = 0;     // in [0, 1800)
  int duration_min = 0;  // >= 1

  bool operator==(const EventRecord&) const = default;
};

struct CovariateSet {
  int age = 0;  // in [15, 120]
  Sex sex = Sex::female;
  DayOfWeek day_of_week = DayOfWeek::Mon;
  Month month = Month::Jan;

  bool operator==(const CovariateSet&) const = default;
};

/// All accepted events of one person-day, sorted ascending by start_min.
struct PersonDay {
  std::string person_id;
  CovariateSet covariates;
  std::vector<EventRecord> events;

  bool operator==(const PersonDay&) const = default;
};

inline constexpr std::string_view kEventCsvHeader =
    "person_id,age,sex,day_of_week,month,activity,start_min,duration_min";

struct ParseStats {
  std::size_t rows_total = 0;             // data rows seen (header excluded)
  std::size_t rows_dropped_non_sleep = 0; // rows filtered out by activity code
};

struct ParseResult {
  std::vector<PersonDay> persons;  // sorted by person_id
  ParseStats stats;
};

/// Parse the event-CSV interchange format. Covariate columns must repeat
/// identically on every row of a person; rows whose activity differs from
/// sleep_code are dropped (and counted in stats). All row-level problems
/// are collected and thrown together as one ParseError.
ParseResult parse_events(std::string_view csv_text, std::string_view sleep_code = "sleep");
ParseResult parse_events(std::istream& in, std::string_view sleep_code = "sleep");

/// Fraction of persons with no event covering minute t_min, where an event
/// covers [start_min, start_min + duration_min). t_min may be 0..1800;
/// t_min == 1800 probes who is still asleep when the window closes.
double awake_fraction_at(const std::vector<PersonDay>& persons, int t_min);

/// Emit the event-CSV format (header + one row per event, LF line ends).
void write_event_csv(const std::vector<PersonDay>& persons, std::ostream& out);
std::string event_csv_string(const std::vector<PersonDay>& persons);

}  // namespace sleepsynth
