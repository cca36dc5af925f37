// Independent re-implementations and fixture helpers shared by the test
// suites. Everything here deliberately avoids the library's own algorithms
// so a bug cannot hide on both sides of a comparison.
#pragma once

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "sleepsynth/common.hpp"
#include "sleepsynth/events.hpp"
#include "sleepsynth/temporalize.hpp"

namespace testutil {

/// Minute-by-minute occupancy scan: the slow, obviously-correct answer to
/// bin_sleep_minutes. Walks every window minute and asks each event.
inline sleepsynth::SleepVector bin_by_minute_scan(
    const std::vector<sleepsynth::EventRecord>& events) {
  sleepsynth::SleepVector bins{};
  for (int minute = 0; minute < sleepsynth::kWindowMinutes; ++minute) {
    bool covered = false;
    for (const auto& ev : events) {
      if (minute >= ev.start_min && minute < ev.start_min + ev.duration_min) {
        covered = true;
        break;
      }
    }
    if (covered) ++bins[minute / 60];
  }
  return bins;
}

/// Quantile by explicit sorted-array indexing, written from the
/// interpolation definition rather than shared code.
inline double quantile_sorted_oracle(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

/// Fresh scratch directory under the system temp root; removed on
/// destruction so test runs do not accumulate state.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("sleepsynth_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Random event list with overlaps and window-straddling tails, matching
/// the shapes ingest accepts.
inline std::vector<sleepsynth::EventRecord> random_events(sleepsynth::Rng& rng, int max_events) {
  std::vector<sleepsynth::EventRecord> events;
  const int n = static_cast<int>(rng.below(static_cast<std::uint64_t>(max_events) + 1));
  std::vector<int> starts;
  for (int i = 0; i < n; ++i) {
    int start;
    do {
      start = rng.uniform_int(0, sleepsynth::kWindowMinutes - 1);
    } while (std::find(starts.begin(), starts.end(), start) != starts.end());
    starts.push_back(start);
    sleepsynth::EventRecord ev;
    ev.person_id = "p0";
    ev.activity = "sleep";
    ev.start_min = start;
    ev.duration_min = rng.uniform_int(1, 700);
    events.push_back(std::move(ev));
  }
  return events;
}

}  // namespace testutil
