#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

#include "sleepsynth/wgan.hpp"

#include <doctest.h>

#include "oracles.hpp"

using namespace sleepsynth;

namespace {

// Two tight clusters on a 2-column plane; rich enough to train against,
// cheap enough for loop-level tests.
Matrix toy_data(int n, sleepsynth::Rng& rng) {
  Matrix m(n, 2);
  for (int i = 0; i < n; ++i) {
    const double center = (i % 2 == 0) ? -0.5 : 0.5;
    m(i, 0) = center + rng.normal(0.0, 0.02);
    m(i, 1) = -center + rng.normal(0.0, 0.02);
  }
  return m;
}

GanConfig tiny_config(std::uint64_t seed) {
  GanConfig config;
  config.latent_dim = 4;
  config.generator_hidden = {16};
  config.critic_hidden = {16};
  config.batch_size = 16;
  config.iterations = 10;
  config.seed = seed;
  return config;
}

double max_abs_param(const DenseNet& net) {
  double worst = 0.0;
  for (const auto& layer : net.layers) {
    for (double w : layer.weights.data) worst = std::max(worst, std::abs(w));
    for (double b : layer.bias) worst = std::max(worst, std::abs(b));
  }
  return worst;
}

Codec schema_codec() {
  FeatureRow row;
  row.age = 30;
  FeatureMatrix m;
  m.rows.push_back(row);
  return fit_codec(m);
}

}  // namespace

TEST_CASE("wasserstein estimate is the difference of means") {
  const std::vector<double> real{1.0, 3.0};
  const std::vector<double> fake{0.0, 2.0};
  CHECK(wasserstein_estimate(real, fake) == 1.0);

  const std::vector<double> constant{0.7, 0.7, 0.7};
  CHECK(wasserstein_estimate(constant, constant) == 0.0);

  sleepsynth::Rng rng(3);
  std::vector<double> a(37), b(61);
  for (auto& v : a) v = rng.normal(0.0, 2.0);
  for (auto& v : b) v = rng.normal(0.5, 2.0);
  double mean_a = 0.0, mean_b = 0.0;
  for (double v : a) mean_a += v;
  for (double v : b) mean_b += v;
  mean_a /= static_cast<double>(a.size());
  mean_b /= static_cast<double>(b.size());
  CHECK(wasserstein_estimate(a, b) == doctest::Approx(mean_a - mean_b).epsilon(1e-15));
}

TEST_CASE("empty score vectors are rejected") {
  const std::vector<double> some{1.0};
  try {
    wasserstein_estimate({}, some);
    FAIL("expected empty batch error");
  } catch (const Error& e) {
    CHECK(e.code() == errc::empty_batch);
  }
  CHECK_THROWS_AS(wasserstein_estimate(some, {}), Error);
}

TEST_CASE("clip_weights clamps exactly the out-of-range parameters") {
  DenseNet net;
  Layer layer;
  layer.weights = Matrix(1, 3);
  layer.weights(0, 0) = 0.5;
  layer.weights(0, 1) = -0.02;
  layer.weights(0, 2) = 0.005;
  layer.bias = {0.3};
  layer.activation = Activation::identity;
  net.layers.push_back(layer);

  clip_weights(net, 0.01);
  CHECK(net.layers[0].weights(0, 0) == 0.01);
  CHECK(net.layers[0].weights(0, 1) == -0.01);
  CHECK(net.layers[0].weights(0, 2) == 0.005);
  CHECK(net.layers[0].bias[0] == 0.01);

  const DenseNet clipped = net;
  clip_weights(net, 0.01);
  CHECK(net == clipped);  // idempotent
}

TEST_CASE("clipping a random net bounds every parameter") {
  sleepsynth::Rng rng(5);
  DenseNet net = make_dense_net({6, 12, 1}, {Activation::relu, Activation::identity}, rng);
  for (auto& layer : net.layers)
    for (auto& b : layer.bias) b = rng.normal(0.0, 1.0);
  clip_weights(net, 0.01);
  CHECK(max_abs_param(net) <= 0.01);
}

TEST_CASE("config validation rejects nonsense") {
  GanConfig config;
  CHECK_NOTHROW(config.validate());
  GanConfig bad = config;
  bad.clip_c = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = config;
  bad.n_critic = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = config;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = config;
  bad.generator_hidden = {0};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = config;
  bad.learning_rate = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = config;
  bad.rho = 1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  // An empty hidden list is a legal degenerate net (single output layer).
  bad = config;
  bad.generator_hidden = {};
  CHECK_NOTHROW(bad.validate());
}

TEST_CASE("config json round-trips, including defaults") {
  const GanConfig config;
  CHECK(gan_config_from_json(gan_config_to_json(config)) == config);

  GanConfig custom;
  custom.latent_dim = 8;
  custom.generator_hidden = {32, 16};
  custom.critic_hidden = {24};
  custom.iterations = 123;
  custom.seed = 987654321ull;
  custom.learning_rate = 1e-4;
  CHECK(gan_config_from_json(gan_config_to_json(custom)) == custom);
}

TEST_CASE("init_model builds the configured shapes with a clipped critic") {
  const GanConfig config = tiny_config(9);
  const ModelCheckpoint cp = init_model(config, 2, 77);
  CHECK(cp.iteration == 0);
  CHECK(cp.codec_hash == 77);
  CHECK(cp.encoded_width == 2);
  REQUIRE(cp.generator.layers.size() == 2);
  CHECK(cp.generator.input_width() == 4);
  CHECK(cp.generator.output_width() == 2);
  CHECK(cp.generator.layers.back().activation == Activation::tanh);
  REQUIRE(cp.critic.layers.size() == 2);
  CHECK(cp.critic.input_width() == 2);
  CHECK(cp.critic.output_width() == 1);
  CHECK(cp.critic.layers.back().activation == Activation::identity);
  CHECK(max_abs_param(cp.critic) <= config.clip_c);
  for (const auto& t : cp.generator_acc) {
    for (double v : t.w.data) CHECK(v == 0.0);
    for (double v : t.b) CHECK(v == 0.0);
  }
}

TEST_CASE("zero iterations leaves the checkpoint at initialization") {
  sleepsynth::Rng rng(13);
  const Matrix data = toy_data(64, rng);
  GanConfig config = tiny_config(21);
  config.iterations = 0;
  std::vector<double> log;
  const ModelCheckpoint trained = train(data, config, 0, &log);
  const ModelCheckpoint fresh = init_model(config, data.cols, 0);
  CHECK(trained == fresh);
  CHECK(log.empty());
}

TEST_CASE("training twice with one seed is bit-identical") {
  sleepsynth::Rng rng(17);
  const Matrix data = toy_data(96, rng);
  GanConfig config = tiny_config(33);
  config.iterations = 25;
  std::vector<double> log_a, log_b;
  const ModelCheckpoint a = train(data, config, 5, &log_a);
  const ModelCheckpoint b = train(data, config, 5, &log_b);
  CHECK(a == b);
  CHECK(log_a == log_b);
  CHECK(log_a.size() == 25);
  for (double w : log_a) CHECK(std::isfinite(w));
}

TEST_CASE("different seeds diverge") {
  sleepsynth::Rng rng(19);
  const Matrix data = toy_data(96, rng);
  GanConfig config = tiny_config(1);
  config.iterations = 5;
  const ModelCheckpoint a = train(data, config, 0);
  config.seed = 2;
  const ModelCheckpoint b = train(data, config, 0);
  CHECK(a.generator != b.generator);
}

TEST_CASE("training needs at least one full batch") {
  sleepsynth::Rng rng(23);
  const Matrix data = toy_data(8, rng);  // smaller than batch_size 16
  const GanConfig config = tiny_config(3);
  try {
    train(data, config, 0);
    FAIL("expected insufficient data error");
  } catch (const Error& e) {
    CHECK(e.code() == errc::insufficient_data);
  }
}

TEST_CASE("critic parameters stay inside the clip box after every step") {
  sleepsynth::Rng rng(29);
  const Matrix data = toy_data(128, rng);
  GanConfig config = tiny_config(7);
  config.iterations = 40;
  int observed_steps = 0;
  double worst = 0.0;
  TrainObserver observer;
  observer.after_critic_step = [&](std::int64_t, int, const DenseNet& critic) {
    ++observed_steps;
    worst = std::max(worst, max_abs_param(critic));
  };
  train(data, config, 0, nullptr, &observer);
  CHECK(observed_steps == 40 * config.n_critic);
  CHECK(worst <= config.clip_c);
}

TEST_CASE("training teaches the critic to score real above fake") {
  sleepsynth::Rng rng(31);
  const Matrix data = toy_data(256, rng);
  // The critic minimizes mean(fake) - mean(real), so once trained it must
  // value fresh real rows above fresh generator output.
  for (std::uint64_t seed : {11ull, 5ull, 77ull}) {
    GanConfig config = tiny_config(seed);
    ModelCheckpoint cp = init_model(config, 2, 0);
    train_iterations(cp, data, 1000);

    sleepsynth::Rng latent_rng(555);
    Matrix z;
    z.rows = 256;
    z.cols = config.latent_dim;
    z.data.resize(z.rows * z.cols);
    for (double& v : z.data) v = latent_rng.normal(0.0, 1.0);
    const Matrix fake = forward(cp.generator, z);
    const Matrix score_real = forward(cp.critic, data);
    const Matrix score_fake = forward(cp.critic, fake);
    CHECK(wasserstein_estimate(std::span(score_real.data), std::span(score_fake.data)) > 0.0);
  }
}

TEST_CASE("the loss log renders as csv") {
  const std::vector<double> w{0.5, -0.25};
  const std::string csv = loss_log_csv(w);
  CHECK(csv == "iteration,wasserstein_estimate\n1,0.5\n2,-0.25\n");
}

TEST_CASE("sampling is deterministic, schema-valid, and codec-checked") {
  const Codec codec = schema_codec();
  GanConfig config = tiny_config(43);
  config.latent_dim = 8;
  const ModelCheckpoint cp = init_model(config, codec.encoded_width, codec_hash(codec));

  const FeatureMatrix a = sample(cp, codec, 5, 99);
  const FeatureMatrix b = sample(cp, codec, 5, 99);
  CHECK(a == b);
  REQUIRE(a.rows.size() == 5);
  for (const auto& row : a.rows) {
    for (int v : row.sleep) {
      CHECK(v >= 0);
      CHECK(v <= 60);
    }
    CHECK(row.age >= 15);
    CHECK(row.age <= 120);
  }

  const FeatureMatrix c = sample(cp, codec, 5, 100);
  CHECK(a != c);

  Codec other = codec;
  other.specs[30].hi = 119.0;
  try {
    sample(cp, other, 5, 99);
    FAIL("expected codec mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == errc::codec_mismatch);
  }
}

TEST_CASE("an untrained generator still produces valid rows") {
  const Codec codec = schema_codec();
  const ModelCheckpoint cp = init_model(tiny_config(51), codec.encoded_width, codec_hash(codec));
  const FeatureMatrix m = sample(cp, codec, 200, 7);
  CHECK(m.rows.size() == 200);
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  sleepsynth::Rng rng(37);
  const Matrix data = toy_data(64, rng);
  GanConfig config = tiny_config(13);
  config.iterations = 12;
  const ModelCheckpoint cp = train(data, config, 321);

  testutil::TempDir dir("ckpt");
  const auto path = dir.file("model.ckpt");
  save_checkpoint(cp, path);
  const ModelCheckpoint loaded = load_checkpoint(path);
  CHECK(loaded == cp);
}

TEST_CASE("corrupt checkpoint files are typed errors, never partial models") {
  sleepsynth::Rng rng(41);
  const Matrix data = toy_data(64, rng);
  GanConfig config = tiny_config(15);
  config.iterations = 3;
  const ModelCheckpoint cp = train(data, config, 0);
  testutil::TempDir dir("ckpt_bad");
  const auto path = dir.file("model.ckpt");
  save_checkpoint(cp, path);

  SUBCASE("missing file is an io error") {
    try {
      load_checkpoint(dir.file("absent.ckpt"));
      FAIL("expected io error");
    } catch (const Error& e) {
      CHECK(e.code() == errc::io_error);
    }
  }
  SUBCASE("wrong magic") {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
    f.close();
    try {
      load_checkpoint(path);
      FAIL("expected bad magic");
    } catch (const Error& e) {
      CHECK(e.code() == errc::bad_magic);
    }
  }
  SUBCASE("future version") {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(4);
    const std::uint32_t v = 999;
    f.write(reinterpret_cast<const char*>(&v), 4);
    f.close();
    try {
      load_checkpoint(path);
      FAIL("expected version mismatch");
    } catch (const Error& e) {
      CHECK(e.code() == errc::version_mismatch);
    }
  }
  SUBCASE("truncation") {
    const auto size = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, size - 9);
    try {
      load_checkpoint(path);
      FAIL("expected checksum mismatch or bad magic");
    } catch (const Error& e) {
      const bool typed = e.code() == errc::checksum_mismatch || e.code() == errc::bad_magic;
      CHECK(typed);
    }
  }
  SUBCASE("flipped payload byte") {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(-200, std::ios::end);
    char c;
    f.seekg(-200, std::ios::end);
    f.read(&c, 1);
    f.seekp(-200, std::ios::end);
    c = static_cast<char>(c ^ 0x40);
    f.write(&c, 1);
    f.close();
    try {
      load_checkpoint(path);
      FAIL("expected checksum mismatch");
    } catch (const Error& e) {
      CHECK(e.code() == errc::checksum_mismatch);
    }
  }
}

TEST_CASE("resuming from a checkpoint reproduces the uninterrupted run") {
  sleepsynth::Rng rng(43);
  const Matrix data = toy_data(96, rng);
  GanConfig config = tiny_config(19);
  config.iterations = 30;

  // Uninterrupted run.
  const ModelCheckpoint full = train(data, config, 11);

  // Split run: 12 iterations, save, load, 18 more.
  ModelCheckpoint part = init_model(config, data.cols, 11);
  train_iterations(part, data, 12);
  testutil::TempDir dir("resume");
  save_checkpoint(part, dir.file("mid.ckpt"));
  ModelCheckpoint resumed = load_checkpoint(dir.file("mid.ckpt"));
  train_iterations(resumed, data, 18);

  CHECK(resumed == full);
}

TEST_CASE("the epoch sampler crosses epoch boundaries identically when split") {
  // 40 rows / batch 16 -> 2 usable batches per epoch; 10 iterations of
  // n_critic 5 consume 50 batches, crossing many epoch boundaries.
  sleepsynth::Rng rng(47);
  const Matrix data = toy_data(40, rng);
  GanConfig config = tiny_config(23);
  config.iterations = 10;

  const ModelCheckpoint full = train(data, config, 0);

  ModelCheckpoint split = init_model(config, data.cols, 0);
  train_iterations(split, data, 3);
  train_iterations(split, data, 4);
  train_iterations(split, data, 3);
  CHECK(split == full);
}
