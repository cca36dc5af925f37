#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "sleepsynth/evaluate.hpp"
#include "sleepsynth/simulate.hpp"
#include "sleepsynth/wgan.hpp"

namespace sleepsynth {

/// One function per pipeline stage. The CLI is a thin shell over these;
/// tests drive them directly. Progress lines go to the given stream
/// (std::cerr in the CLI); produced files are named in the results.

struct SimulateOptions {
  std::filesystem::path config_path;  // empty: use default_population()
  std::filesystem::path out_events;
  std::optional<std::uint64_t> seed;  // overrides the config seed
  std::optional<int> n_persons;       // overrides the config count
};

struct SimulateResult {
  int n_persons = 0;
  std::size_t n_events = 0;
};

SimulateResult run_simulate(const SimulateOptions& opt, std::ostream& progress);

struct TemporalizeOptions {
  std::filesystem::path events_csv;
  std::filesystem::path out_matrix;
};

struct TemporalizeResult {
  int n_rows = 0;
  std::size_t rows_dropped_non_sleep = 0;
  double awake_fraction_at_end = 0.0;  // audit value at minute 1800
};

TemporalizeResult run_temporalize(const TemporalizeOptions& opt, std::ostream& progress);

struct TrainOptions {
  std::filesystem::path matrix_csv;
  std::filesystem::path gan_config_path;  // empty: GanConfig defaults
  std::filesystem::path out_checkpoint;
  std::filesystem::path out_codec;     // empty: <checkpoint>.codec.json
  std::filesystem::path out_loss_log;  // empty: <checkpoint>.loss.csv
  std::optional<std::uint64_t> seed;   // overrides the config seed
  std::optional<int> iterations;       // overrides the config count
};

struct TrainResult {
  int iterations = 0;
  double final_w_estimate = 0.0;
  std::filesystem::path checkpoint;
  std::filesystem::path codec;
  std::filesystem::path loss_log;
};

TrainResult run_train(const TrainOptions& opt, std::ostream& progress);

struct GenerateOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path codec;  // empty: <checkpoint>.codec.json
  int n = 0;
  std::uint64_t seed = 0;
  std::filesystem::path out_matrix;
};

struct GenerateResult {
  int n_rows = 0;
};

GenerateResult run_generate(const GenerateOptions& opt, std::ostream& progress);

struct EvaluateOptions {
  std::filesystem::path real_csv;
  std::filesystem::path synth_csv;
  std::filesystem::path out_dir;
  std::vector<AgeGroup> quantile_groups;  // empty: just 15-24
};

struct EvaluateResult {
  double mean_abs_error = 0.0;
  double max_covariate_deviation = 0.0;
  std::filesystem::path report_json;
};

EvaluateResult run_evaluate(const EvaluateOptions& opt, std::ostream& progress);

}  // namespace sleepsynth
