#include "sleepsynth/pipeline.hpp"

#include <algorithm>

#include "sleepsynth/codec.hpp"
#include "sleepsynth/temporalize.hpp"

namespace sleepsynth {

SimulateResult run_simulate(const SimulateOptions& opt, std::ostream& progress) {
  PopulationConfig config =
      opt.config_path.empty() ? default_population() : load_population_config(opt.config_path);
  if (opt.seed) config.seed = *opt.seed;
  if (opt.n_persons) config.n_persons = *opt.n_persons;
  config.validate();

  const std::vector<PersonDay> persons = simulate_population(config);
  write_file_atomic(opt.out_events, event_csv_string(persons));

  SimulateResult result;
  result.n_persons = static_cast<int>(persons.size());
  for (const auto& p : persons) result.n_events += p.events.size();
  progress << "simulated " << result.n_persons << " persons, " << result.n_events
           << " events -> " << opt.out_events.string() << "\n";
  return result;
}

TemporalizeResult run_temporalize(const TemporalizeOptions& opt, std::ostream& progress) {
  const ParseResult parsed = parse_events(read_text_file(opt.events_csv));
  const FeatureMatrix matrix = build_feature_matrix(parsed.persons);
  write_file_atomic(opt.out_matrix, matrix_csv_string(matrix));

  TemporalizeResult result;
  result.n_rows = static_cast<int>(matrix.rows.size());
  result.rows_dropped_non_sleep = parsed.stats.rows_dropped_non_sleep;
  result.awake_fraction_at_end = awake_fraction_at(parsed.persons, kWindowMinutes);
  progress << "temporalized " << result.n_rows << " persons ("
           << result.rows_dropped_non_sleep << " non-sleep rows dropped) -> "
           << opt.out_matrix.string() << "\n";
  progress << "awake fraction at window end: "
           << format_double(result.awake_fraction_at_end) << "\n";
  return result;
}

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& base, const char* suffix) {
  return std::filesystem::path(base.string() + suffix);
}

}  // namespace

TrainResult run_train(const TrainOptions& opt, std::ostream& progress) {
  GanConfig config =
      opt.gan_config_path.empty() ? GanConfig{} : load_gan_config(opt.gan_config_path);
  if (opt.seed) config.seed = *opt.seed;
  if (opt.iterations) config.iterations = *opt.iterations;
  config.validate();

  const FeatureMatrix matrix = read_matrix_csv(read_text_file(opt.matrix_csv));
  const Codec codec = fit_codec(matrix);
  const Matrix encoded = encode_matrix(codec, matrix);
  progress << "training on " << encoded.rows << " rows (" << encoded.cols
           << " encoded columns), " << config.iterations << " iterations\n";

  const int report_every = std::max(1, config.iterations / 20);
  TrainObserver observer;
  observer.after_iteration = [&](std::int64_t iteration, double w) {
    if (iteration % report_every == 0 || iteration == config.iterations)
      progress << "  iteration " << iteration << "/" << config.iterations
               << "  w_estimate " << format_double(w) << "\n";
  };

  std::vector<double> loss_log;
  const ModelCheckpoint cp = train(encoded, config, codec_hash(codec), &loss_log, &observer);

  TrainResult result;
  result.iterations = config.iterations;
  result.final_w_estimate = loss_log.empty() ? 0.0 : loss_log.back();
  result.checkpoint = opt.out_checkpoint;
  result.codec = opt.out_codec.empty() ? with_suffix(opt.out_checkpoint, ".codec.json") : opt.out_codec;
  result.loss_log =
      opt.out_loss_log.empty() ? with_suffix(opt.out_checkpoint, ".loss.csv") : opt.out_loss_log;

  save_checkpoint(cp, result.checkpoint);
  save_codec(codec, result.codec);
  write_file_atomic(result.loss_log, loss_log_csv(loss_log));
  progress << "wrote " << result.checkpoint.string() << "\n";
  return result;
}

GenerateResult run_generate(const GenerateOptions& opt, std::ostream& progress) {
  const ModelCheckpoint cp = load_checkpoint(opt.checkpoint);
  const std::filesystem::path codec_path =
      opt.codec.empty() ? with_suffix(opt.checkpoint, ".codec.json") : opt.codec;
  const Codec codec = load_codec(codec_path);
  const FeatureMatrix samples = sample(cp, codec, opt.n, opt.seed);
  write_file_atomic(opt.out_matrix, matrix_csv_string(samples));

  GenerateResult result;
  result.n_rows = static_cast<int>(samples.rows.size());
  progress << "generated " << result.n_rows << " rows -> " << opt.out_matrix.string() << "\n";
  return result;
}

EvaluateResult run_evaluate(const EvaluateOptions& opt, std::ostream& progress) {
  const FeatureMatrix real = read_matrix_csv(read_text_file(opt.real_csv));
  const FeatureMatrix synth = read_matrix_csv(read_text_file(opt.synth_csv));
  const EvalReport report = build_report(real, synth, opt.quantile_groups);
  write_report_files(report, opt.out_dir);

  EvaluateResult result;
  result.mean_abs_error = report.mean_abs_error;
  result.max_covariate_deviation = report.max_covariate_deviation;
  result.report_json = opt.out_dir / "report.json";
  progress << "mean-per-hour MAE: " << format_double(report.mean_abs_error) << " minutes\n";
  progress << "max covariate probability deviation: "
           << format_double(report.max_covariate_deviation) << "\n";
  progress << "wrote " << result.report_json.string() << "\n";
  return result;
}

}  // namespace sleepsynth
