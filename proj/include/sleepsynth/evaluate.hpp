#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sleepsynth/temporalize.hpp"

#include <json.hpp>

namespace sleepsynth {

/// Decade age bands over the schema's [15, 120] age range, last band
/// open-ended. Used for evaluation only; models never see the bands.
enum class AgeGroup { g15_24, g25_34, g35_44, g45_54, g55_64, g65_74, g75_plus };

inline constexpr int kAgeGroupCount = 7;

std::string_view age_group_label(AgeGroup g);
AgeGroup age_group_of(int age);
AgeGroup age_group_from_label(std::string_view label);
std::array<AgeGroup, kAgeGroupCount> all_age_groups();

/// Type-7 quantile: h = (n-1)q, linear interpolation between the two
/// surrounding order statistics of the sorted values. values need not be
/// sorted. q must lie in [0, 1].
double quantile(std::span<const double> values, double q);

/// Column mean of each of the 30 sleep bins, in minutes.
std::array<double, kSleepBins> mean_sleep_per_hour(const FeatureMatrix& matrix);

struct CovariateProb {
  std::string label;
  double p_real = 0.0;
  double p_synth = 0.0;

  bool operator==(const CovariateProb&) const = default;
};

/// Empirical level probabilities in both matrices: 2 sex + 7 day + 12
/// month levels, the 7 age groups, and the derived weekday (Mon-Fri)
/// indicator. 29 pairs, fixed order.
std::vector<CovariateProb> covariate_probabilities(const FeatureMatrix& real,
                                                   const FeatureMatrix& synth);

struct GridCell {
  int n = 0;
  double mean = 0.0;  // meaningful only when n >= 1

  bool operator==(const GridCell&) const = default;
};

/// 7 age groups x 7 days; cell mean is mean total sleep minutes per day.
struct StratifiedGrid {
  std::array<std::array<GridCell, 7>, kAgeGroupCount> cells{};

  const GridCell& at(AgeGroup g, DayOfWeek d) const {
    return cells[static_cast<int>(g)][static_cast<int>(d)];
  }
  GridCell& at(AgeGroup g, DayOfWeek d) {
    return cells[static_cast<int>(g)][static_cast<int>(d)];
  }
};

StratifiedGrid stratified_means(const FeatureMatrix& matrix);

inline constexpr std::array<double, 3> kDefaultQuantiles = {0.25, 0.5, 0.75};

struct QuantileCurves {
  AgeGroup group = AgeGroup::g15_24;
  std::vector<double> qs;
  // values[bin][qi], bins in schema order.
  std::array<std::vector<double>, kSleepBins> values{};
};

/// Per-bin quantiles of the sleep columns over the rows in one age group.
/// Throws EmptyGroup if the group has no rows.
QuantileCurves quantile_curves(const FeatureMatrix& matrix, AgeGroup group,
                               std::span<const double> qs = kDefaultQuantiles);

struct QuantileComparison {
  AgeGroup group = AgeGroup::g15_24;
  int n_real = 0;
  int n_synth = 0;
  QuantileCurves real;
  QuantileCurves synth;
  // q75 - q25 per bin, one entry per sleep bin.
  std::array<double, kSleepBins> iq_width_real{};
  std::array<double, kSleepBins> iq_width_synth{};
};

struct EvalReport {
  int n_real = 0;
  int n_synth = 0;
  std::array<double, kSleepBins> mean_real{};
  std::array<double, kSleepBins> mean_synth{};
  double mean_abs_error = 0.0;  // mean over bins of |mean_real - mean_synth|
  std::vector<CovariateProb> covariates;
  double max_covariate_deviation = 0.0;
  StratifiedGrid grid_real;
  StratifiedGrid grid_synth;
  std::vector<QuantileComparison> quantiles;
  // Requested groups with no rows on one side, skipped rather than faked.
  std::vector<AgeGroup> skipped_groups;
};

/// Full evaluation battery. groups_for_quantiles defaults to just 15-24.
EvalReport build_report(const FeatureMatrix& real, const FeatureMatrix& synth,
                        std::span<const AgeGroup> groups_for_quantiles = {});

nlohmann::json report_to_json(const EvalReport& report);

/// report.json plus one plot-ready CSV per figure-style analysis:
/// fig2_means.csv, fig3_probs.csv, fig4_grid.csv, and one
/// fig5_quantiles_<group>.csv per compared group.
void write_report_files(const EvalReport& report, const std::filesystem::path& out_dir);

}  // namespace sleepsynth
