#include "sleepsynth/events.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace sleepsynth {

namespace {

constexpr std::array<std::string_view, kSexCount> kSexTokens = {"female", "male"};
constexpr std::array<std::string_view, kDayCount> kDayTokens = {"Mon", "Tue", "Wed", "Thu",
                                                                "Fri", "Sat", "Sun"};
constexpr std::array<std::string_view, kMonthCount> kMonthTokens = {
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

template <typename Enum, std::size_t N>
std::optional<Enum> parse_token(const std::array<std::string_view, N>& tokens,
                                std::string_view token) {
  for (std::size_t i = 0; i < N; ++i) {
    if (tokens[i] == token) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

std::optional<int> parse_int(std::string_view token) {
  int value = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || token.empty()) return std::nullopt;
  return value;
}

}  // namespace

std::string_view sex_token(Sex s) { return kSexTokens[static_cast<std::size_t>(s)]; }
std::string_view day_token(DayOfWeek d) { return kDayTokens[static_cast<std::size_t>(d)]; }
std::string_view month_token(Month m) { return kMonthTokens[static_cast<std::size_t>(m)]; }

std::optional<Sex> parse_sex(std::string_view token) { return parse_token<Sex>(kSexTokens, token); }
std::optional<DayOfWeek> parse_day(std::string_view token) {
  return parse_token<DayOfWeek>(kDayTokens, token);
}
std::optional<Month> parse_month(std::string_view token) {
  return parse_token<Month>(kMonthTokens, token);
}

ParseResult parse_events(std::string_view csv_text, std::string_view sleep_code) {
  struct Builder {
    CovariateSet covariates;
    std::size_t first_line = 0;
    std::vector<EventRecord> events;
    std::set<int> starts;  // duplicate (person, start) detection
  };

  std::vector<LineError> errors;
  std::map<std::string, Builder, std::less<>> persons;  // keyed => canonical order
  ParseStats stats;

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
      if (line != kEventCsvHeader) {
        throw ParseError({{line_no, errc::schema_mismatch,
                           "expected header '" + std::string(kEventCsvHeader) + "'"}});
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) {
      if (pos <= csv_text.size() && csv_text.substr(pos).find_first_not_of("\r\n") !=
                                        std::string_view::npos) {
        errors.push_back({line_no, errc::malformed_row, "blank line inside data"});
      }
      continue;
    }

    ++stats.rows_total;
    const auto fields = split_csv_line(line);
    if (fields.size() != 8) {
      errors.push_back({line_no, errc::malformed_row,
                        "expected 8 columns, got " + std::to_string(fields.size())});
      continue;
    }

    const std::string_view person_id = fields[0];
    if (person_id.empty()) {
      errors.push_back({line_no, errc::malformed_row, "empty person_id"});
      continue;
    }

    const auto age = parse_int(fields[1]);
    const auto sex = parse_sex(fields[2]);
    const auto day = parse_day(fields[3]);
    const auto month = parse_month(fields[4]);
    const std::string_view activity = fields[5];
    const auto start = parse_int(fields[6]);
    const auto duration = parse_int(fields[7]);

    if (!age || !start || !duration) {
      errors.push_back({line_no, errc::malformed_row, "unparsable integer field"});
      continue;
    }
    if (!sex) {
      errors.push_back({line_no, errc::domain_error, "unknown sex token '" + std::string(fields[2]) + "'"});
      continue;
    }
    if (!day) {
      errors.push_back({line_no, errc::domain_error, "unknown day_of_week token '" + std::string(fields[3]) + "'"});
      continue;
    }
    if (!month) {
      errors.push_back({line_no, errc::domain_error, "unknown month token '" + std::string(fields[4]) + "'"});
      continue;
    }
    if (*age < 15 || *age > 120) {
      errors.push_back({line_no, errc::domain_error, "age " + std::to_string(*age) + " outside [15, 120]"});
      continue;
    }
    if (*start < 0 || *start >= kWindowMinutes) {
      errors.push_back({line_no, errc::domain_error,
                        "start_min " + std::to_string(*start) + " outside [0, 1800)"});
      continue;
    }
    if (*duration < 1) {
      errors.push_back({line_no, errc::domain_error,
                        "duration_min " + std::to_string(*duration) + " < 1"});
      continue;
    }
    if (activity.empty()) {
      errors.push_back({line_no, errc::domain_error, "empty activity"});
      continue;
    }

    const CovariateSet cov{*age, *sex, *day, *month};
    auto it = persons.find(person_id);
    if (it == persons.end()) {
      it = persons.emplace(std::string(person_id), Builder{cov, line_no, {}, {}}).first;
    } else if (it->second.covariates != cov) {
      errors.push_back({line_no, errc::covariate_conflict,
                        "covariates for '" + std::string(person_id) +
                            "' differ from line " + std::to_string(it->second.first_line)});
      continue;
    }

    if (activity != sleep_code) {
      ++stats.rows_dropped_non_sleep;
      continue;
    }

    if (!it->second.starts.insert(*start).second) {
      errors.push_back({line_no, errc::covariate_conflict,
                        "duplicate event start " + std::to_string(*start) + " for '" +
                            std::string(person_id) + "'"});
      continue;
    }
    it->second.events.push_back(EventRecord{std::string(person_id), std::string(activity),
                                            *start, *duration});
  }

  if (!header_seen) {
    throw ParseError({{1, errc::schema_mismatch, "missing header"}});
  }
  if (!errors.empty()) throw ParseError(std::move(errors));

  ParseResult result;
  result.stats = stats;
  result.persons.reserve(persons.size());
  for (auto& [id, builder] : persons) {
    std::sort(builder.events.begin(), builder.events.end(),
              [](const EventRecord& a, const EventRecord& b) { return a.start_min < b.start_min; });
    result.persons.push_back(PersonDay{id, builder.covariates, std::move(builder.events)});
  }
  return result;
}

ParseResult parse_events(std::istream& in, std::string_view sleep_code) {
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_events(std::string_view(content), sleep_code);
}

double awake_fraction_at(const std::vector<PersonDay>& persons, int t_min) {
  if (persons.empty()) throw Error(errc::empty_input, "awake_fraction_at: no persons");
  if (t_min < 0 || t_min > kWindowMinutes)
    throw Error(errc::domain_error, "t_min " + std::to_string(t_min) + " outside [0, 1800]");
  std::size_t awake = 0;
  for (const PersonDay& person : persons) {
    bool asleep = false;
    for (const EventRecord& e : person.events) {
      if (e.start_min <= t_min && t_min < e.start_min + e.duration_min) {
        asleep = true;
        break;
      }
    }
    if (!asleep) ++awake;
  }
  return static_cast<double>(awake) / static_cast<double>(persons.size());
}

void write_event_csv(const std::vector<PersonDay>& persons, std::ostream& out) {
  out << kEventCsvHeader << '\n';
  for (const PersonDay& person : persons) {
    const CovariateSet& c = person.covariates;
    for (const EventRecord& e : person.events) {
      out << person.person_id << ',' << c.age << ',' << sex_token(c.sex) << ','
          << day_token(c.day_of_week) << ',' << month_token(c.month) << ',' << e.activity << ','
          << e.start_min << ',' << e.duration_min << '\n';
    }
  }
}

std::string event_csv_string(const std::vector<PersonDay>& persons) {
  std::ostringstream oss;
  write_event_csv(persons, oss);
  return oss.str();
}

}  // namespace sleepsynth
