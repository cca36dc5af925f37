#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "sleepsynth/temporalize.hpp"

#include <doctest.h>
#include <json.hpp>

#include "oracles.hpp"

using namespace sleepsynth;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

CliResult run_cli(const testutil::TempDir& dir, const std::string& args) {
  const auto out_path = dir.file("cli_stdout.txt");
  const auto err_path = dir.file("cli_stderr.txt");
  const std::string command = std::string("\"") + SLEEPSYNTH_CLI + "\" " + args + " > " +
                              out_path.string() + " 2> " + err_path.string();
  const int raw = std::system(command.c_str());
  CliResult result;
  result.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  return result;
}

FeatureMatrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  return read_matrix_csv(in);
}

}  // namespace

TEST_CASE("cli runs the five-step pipeline end to end") {
  testutil::TempDir dir("cli_pipeline");
  const auto events = dir.file("events.csv");
  const auto real = dir.file("real.csv");
  const auto ckpt = dir.file("model.ckpt");
  const auto synth = dir.file("synth.csv");
  const auto eval_dir = dir.file("eval");

  const CliResult sim = run_cli(
      dir, "simulate --out " + events.string() + " --n 250 --seed 5");
  CHECK(sim.code == 0);
  CHECK(sim.out.find(events.string()) != std::string::npos);
  REQUIRE(std::filesystem::exists(events));

  const CliResult temp = run_cli(
      dir, "temporalize --events " + events.string() + " --out " + real.string());
  CHECK(temp.code == 0);
  REQUIRE(std::filesystem::exists(real));
  CHECK(read_matrix(real).rows.size() == 250);

  const CliResult train = run_cli(
      dir, "train --matrix " + real.string() + " --out " + ckpt.string() +
               " --iterations 30 --seed 9");
  CHECK(train.code == 0);
  REQUIRE(std::filesystem::exists(ckpt));
  CHECK(std::filesystem::exists(dir.file("model.ckpt.codec.json")));
  REQUIRE(std::filesystem::exists(dir.file("model.ckpt.loss.csv")));
  std::ifstream loss_in(dir.file("model.ckpt.loss.csv"));
  int loss_lines = 0;
  for (std::string line; std::getline(loss_in, line);) ++loss_lines;
  CHECK(loss_lines == 31);  // header + one row per iteration

  const CliResult gen = run_cli(
      dir, "generate --checkpoint " + ckpt.string() + " --n 40 --seed 3 --out " +
               synth.string());
  CHECK(gen.code == 0);
  REQUIRE(std::filesystem::exists(synth));
  CHECK(read_matrix(synth).rows.size() == 40);

  const CliResult eval = run_cli(
      dir, "evaluate --real " + real.string() + " --synth " + synth.string() +
               " --out-dir " + eval_dir.string());
  CHECK(eval.code == 0);
  CHECK(std::filesystem::exists(eval_dir / "report.json"));
  CHECK(std::filesystem::exists(eval_dir / "fig2_means.csv"));
  CHECK(std::filesystem::exists(eval_dir / "fig3_probs.csv"));
  CHECK(std::filesystem::exists(eval_dir / "fig4_grid.csv"));
  std::ifstream report_in(eval_dir / "report.json");
  const nlohmann::json report = nlohmann::json::parse(report_in);
  CHECK(report["n_real"] == 250);
  CHECK(report["n_synth"] == 40);
}

TEST_CASE("cli runs are deterministic for a fixed seed") {
  testutil::TempDir dir("cli_determinism");
  const auto events_a = dir.file("events_a.csv");
  const auto events_b = dir.file("events_b.csv");
  CHECK(run_cli(dir, "simulate --out " + events_a.string() + " --n 120 --seed 77").code == 0);
  CHECK(run_cli(dir, "simulate --out " + events_b.string() + " --n 120 --seed 77").code == 0);
  const std::string bytes_a = slurp(events_a);
  CHECK(!bytes_a.empty());
  CHECK(bytes_a == slurp(events_b));

  const auto real = dir.file("real.csv");
  const auto ckpt = dir.file("model.ckpt");
  REQUIRE(run_cli(dir, "temporalize --events " + events_a.string() + " --out " +
                           real.string()).code == 0);
  REQUIRE(run_cli(dir, "train --matrix " + real.string() + " --out " + ckpt.string() +
                           " --iterations 15 --seed 4").code == 0);
  const auto synth_a = dir.file("synth_a.csv");
  const auto synth_b = dir.file("synth_b.csv");
  CHECK(run_cli(dir, "generate --checkpoint " + ckpt.string() + " --n 30 --seed 11 --out " +
                         synth_a.string()).code == 0);
  CHECK(run_cli(dir, "generate --checkpoint " + ckpt.string() + " --n 30 --seed 11 --out " +
                         synth_b.string()).code == 0);
  const std::string synth_bytes = slurp(synth_a);
  CHECK(!synth_bytes.empty());
  CHECK(synth_bytes == slurp(synth_b));

  const auto synth_c = dir.file("synth_c.csv");
  CHECK(run_cli(dir, "generate --checkpoint " + ckpt.string() + " --n 30 --seed 12 --out " +
                         synth_c.string()).code == 0);
  CHECK(synth_bytes != slurp(synth_c));
}

TEST_CASE("cli maps error classes to exit codes") {
  testutil::TempDir dir("cli_errors");

  SUBCASE("malformed input data exits 1") {
    const auto bad = dir.file("bad.csv");
    std::ofstream(bad) << "not,the,right,header\n";
    const CliResult r = run_cli(
        dir, "temporalize --events " + bad.string() + " --out " + dir.file("x.csv").string());
    CHECK(r.code == 1);
    CHECK(r.err.find("error:") != std::string::npos);
  }

  SUBCASE("unwritable output path exits 2") {
    const auto events = dir.file("events.csv");
    REQUIRE(run_cli(dir, "simulate --out " + events.string() + " --n 20 --seed 1").code == 0);
    // The parent of the output path is a regular file, so it cannot be
    // created as a directory and the write must fail.
    const CliResult r = run_cli(
        dir, "temporalize --events " + events.string() + " --out " +
                 (events / "x.csv").string());
    CHECK(r.code == 2);
  }

  SUBCASE("missing required option fails to parse") {
    CHECK(run_cli(dir, "simulate --n 20").code != 0);
  }

  SUBCASE("missing input file fails the existence check") {
    const CliResult r = run_cli(
        dir, "temporalize --events " + dir.file("absent.csv").string() + " --out " +
                 dir.file("x.csv").string());
    CHECK(r.code != 0);
  }

  SUBCASE("corrupt checkpoint exits 1") {
    const auto fake = dir.file("fake.ckpt");
    std::ofstream(fake, std::ios::binary) << "XXXXnot a checkpoint";
    const CliResult r = run_cli(
        dir, "generate --checkpoint " + fake.string() + " --n 5 --seed 1 --out " +
                 dir.file("x.csv").string());
    CHECK(r.code == 1);
  }
}

TEST_CASE("cli reports failures as json when asked") {
  testutil::TempDir dir("cli_json_errors");
  const auto bad = dir.file("bad.csv");
  std::ofstream(bad) << "not,the,right,header\n";
  const CliResult r = run_cli(
      dir, "--json-errors temporalize --events " + bad.string() + " --out " +
               dir.file("x.csv").string());
  CHECK(r.code == 1);
  const nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK(j["error"]["code"] == "SchemaMismatch");
  REQUIRE(j["error"]["lines"].size() == 1);
  CHECK(j["error"]["lines"][0]["line"] == 1);
  CHECK(j["error"]["lines"][0]["code"] == "SchemaMismatch");
}
