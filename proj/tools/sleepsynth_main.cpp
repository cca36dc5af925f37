#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "sleepsynth/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

namespace {

using namespace sleepsynth;

int exit_code_for(errc code) {
  switch (code) {
    case errc::io_error:
      return 2;
    case errc::non_finite_gradient:
      return 3;
    default:
      return 1;
  }
}

void print_error(const Error& e, bool json_errors) {
  if (!json_errors) {
    std::cerr << "error: " << e.what() << "\n";
    return;
  }
  nlohmann::json j{{"error", {{"code", std::string(errc_name(e.code()))}, {"message", e.what()}}}};
  if (const auto* pe = dynamic_cast<const ParseError*>(&e)) {
    nlohmann::json lines = nlohmann::json::array();
    for (const auto& le : pe->errors())
      lines.push_back({{"line", le.line},
                       {"code", std::string(errc_name(le.code))},
                       {"message", le.message}});
    j["error"]["lines"] = std::move(lines);
  }
  std::cout << j.dump() << "\n";
}

std::vector<AgeGroup> parse_groups(const std::vector<std::string>& labels) {
  std::vector<AgeGroup> groups;
  for (const auto& label : labels) groups.push_back(age_group_from_label(label));
  return groups;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sleepsynth: simulate sleep-event data, train a generative model on it, "
               "and evaluate synthetic against real"};
  app.require_subcommand(1);
  bool json_errors = false;
  app.add_flag("--json-errors", json_errors, "report failures as a JSON object on stdout");

  SimulateOptions sim;
  std::uint64_t sim_seed = 0;
  int sim_n = 0;
  auto* cmd_sim = app.add_subcommand("simulate", "generate a population event CSV");
  cmd_sim->add_option("--config", sim.config_path, "population config JSON (default: built-in)")
      ->check(CLI::ExistingFile);
  cmd_sim->add_option("--out", sim.out_events, "output event CSV path")->required();
  auto* sim_seed_opt = cmd_sim->add_option("--seed", sim_seed, "override config seed");
  auto* sim_n_opt = cmd_sim->add_option("--n", sim_n, "override config person count");

  TemporalizeOptions temp;
  auto* cmd_temp = app.add_subcommand("temporalize", "bin an event CSV into the feature matrix");
  cmd_temp->add_option("--events", temp.events_csv, "input event CSV")->required()
      ->check(CLI::ExistingFile);
  cmd_temp->add_option("--out", temp.out_matrix, "output matrix CSV path")->required();

  TrainOptions tr;
  std::uint64_t tr_seed = 0;
  int tr_iters = 0;
  auto* cmd_train = app.add_subcommand("train", "train the generative model on a matrix CSV");
  cmd_train->add_option("--matrix", tr.matrix_csv, "input matrix CSV")->required()
      ->check(CLI::ExistingFile);
  cmd_train->add_option("--config", tr.gan_config_path, "training config JSON (default: built-in)")
      ->check(CLI::ExistingFile);
  cmd_train->add_option("--out", tr.out_checkpoint, "output checkpoint path")->required();
  cmd_train->add_option("--codec", tr.out_codec, "output codec path (default: <out>.codec.json)");
  cmd_train->add_option("--loss-log", tr.out_loss_log,
                        "output loss CSV path (default: <out>.loss.csv)");
  auto* tr_seed_opt = cmd_train->add_option("--seed", tr_seed, "override config seed");
  auto* tr_iters_opt = cmd_train->add_option("--iterations", tr_iters, "override iteration count");

  GenerateOptions gen;
  auto* cmd_gen = app.add_subcommand("generate", "sample synthetic rows from a checkpoint");
  cmd_gen->add_option("--checkpoint", gen.checkpoint, "model checkpoint")->required()
      ->check(CLI::ExistingFile);
  cmd_gen->add_option("--codec", gen.codec, "codec JSON (default: <checkpoint>.codec.json)");
  cmd_gen->add_option("--n", gen.n, "rows to generate")->required();
  cmd_gen->add_option("--seed", gen.seed, "sampling seed")->required();
  cmd_gen->add_option("--out", gen.out_matrix, "output matrix CSV path")->required();

  EvaluateOptions ev;
  std::vector<std::string> group_labels;
  auto* cmd_eval = app.add_subcommand("evaluate", "compare a synthetic matrix against a real one");
  cmd_eval->add_option("--real", ev.real_csv, "real matrix CSV")->required()
      ->check(CLI::ExistingFile);
  cmd_eval->add_option("--synth", ev.synth_csv, "synthetic matrix CSV")->required()
      ->check(CLI::ExistingFile);
  cmd_eval->add_option("--out-dir", ev.out_dir, "report output directory")->required();
  cmd_eval->add_option("--group", group_labels,
                       "age group for quantile curves, repeatable (default: 15-24)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_sim) {
      if (*sim_seed_opt) sim.seed = sim_seed;
      if (*sim_n_opt) sim.n_persons = sim_n;
      run_simulate(sim, std::cerr);
      std::cout << sim.out_events.string() << "\n";
    } else if (*cmd_temp) {
      run_temporalize(temp, std::cerr);
      std::cout << temp.out_matrix.string() << "\n";
    } else if (*cmd_train) {
      if (*tr_seed_opt) tr.seed = tr_seed;
      if (*tr_iters_opt) tr.iterations = tr_iters;
      const TrainResult result = run_train(tr, std::cerr);
      std::cout << result.checkpoint.string() << "\n"
                << result.codec.string() << "\n"
                << result.loss_log.string() << "\n";
    } else if (*cmd_gen) {
      run_generate(gen, std::cerr);
      std::cout << gen.out_matrix.string() << "\n";
    } else if (*cmd_eval) {
      ev.quantile_groups = parse_groups(group_labels);
      const EvaluateResult result = run_evaluate(ev, std::cerr);
      std::cout << result.report_json.string() << "\n";
    }
  } catch (const Error& e) {
    print_error(e, json_errors);
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
