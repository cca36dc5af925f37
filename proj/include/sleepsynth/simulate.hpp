#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "sleepsynth/events.hpp"

#include <json.hpp>

namespace sleepsynth {

/// Normal model of one sleep episode: onset and duration in minutes,
/// onset measured from the window origin (4:00am).
struct EpisodeModel {
  double onset_mean = 0.0;
  double onset_sd = 0.0;
  double dur_mean = 0.0;
  double dur_sd = 0.0;

  bool operator==(const EpisodeModel&) const = default;
};

struct GroupProfile {
  std::string name;
  int age_lo = 15;
  int age_hi = 120;
  double weight = 0.0;  // sampling probability; weights sum to 1
  EpisodeModel weekday;
  EpisodeModel weekend;
  double p_nap = 0.0;
  EpisodeModel nap;  // same model for both day types

  bool operator==(const GroupProfile&) const = default;
};

struct PopulationConfig {
  std::vector<GroupProfile> profiles;
  int n_persons = 0;
  std::array<double, kDayCount> day_weights{};   // default uniform
  std::array<double, kMonthCount> month_weights{};
  std::uint64_t seed = 0;

  void validate() const;

  bool operator==(const PopulationConfig&) const = default;
};

nlohmann::json population_config_to_json(const PopulationConfig& config);
PopulationConfig population_config_from_json(const nlohmann::json& j);
PopulationConfig load_population_config(const std::filesystem::path& path);

/// Draw one PersonDay per person. Each person i uses its own RNG seeded
/// with config.seed + i, so any subset of persons can be generated in
/// isolation (or in parallel) with identical results. Draw order per
/// person: profile, age, sex, day, month, main onset, main duration, nap
/// coin, then (only if napping) nap onset and duration.
std::vector<PersonDay> simulate_population(const PopulationConfig& config);

/// A fixed seven-profile population whose ground truth encodes the target
/// trends: 15-24 sleeps most (weekend durations far above weekday ones),
/// 35-54 least, and means drift back up with age past 55. Group weights
/// taper on both sides of 35-44 so the age density is single-peaked.
PopulationConfig default_population();

}  // namespace sleepsynth
