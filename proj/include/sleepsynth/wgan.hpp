#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sleepsynth/codec.hpp"
#include "sleepsynth/net.hpp"

#include <json.hpp>

namespace sleepsynth {

/// Training configuration. Hidden widths exclude the fixed ends: the
/// generator runs latent_dim -> generator_hidden... -> encoded_width with
/// a tanh head, the critic encoded_width -> critic_hidden... -> 1 with an
/// identity head; hidden layers are relu.
struct GanConfig {
  int latent_dim = 32;
  std::vector<int> generator_hidden = {128, 128};
  std::vector<int> critic_hidden = {128, 128};
  int n_critic = 5;
  double clip_c = 0.01;
  int batch_size = 64;
  double learning_rate = 5e-5;
  double rho = 0.9;
  double epsilon = 1e-8;
  int iterations = 3000;  // generator iterations
  std::uint64_t seed = 0;

  void validate() const;

  bool operator==(const GanConfig&) const = default;
};

nlohmann::json gan_config_to_json(const GanConfig& config);
GanConfig gan_config_from_json(const nlohmann::json& j);
GanConfig load_gan_config(const std::filesystem::path& path);

/// Complete training state: both networks, optimizer accumulators, the
/// data-sampler position, and the RNG stream. Round-trips bit-exactly
/// through save/load, so resuming from disk continues the exact run.
struct ModelCheckpoint {
  GanConfig config;
  std::uint64_t codec_hash = 0;
  int encoded_width = 0;
  std::int64_t iteration = 0;  // generator iterations completed
  std::int64_t epoch = 0;      // real-data epoch index
  std::int64_t cursor = 0;     // next unread position in the epoch permutation
  DenseNet generator;
  DenseNet critic;
  std::vector<LayerTensors> generator_acc;  // RMSProp accumulators
  std::vector<LayerTensors> critic_acc;
  std::string rng_state;

  bool operator==(const ModelCheckpoint&) const = default;
};

/// mean(critic_real) - mean(critic_fake). The critic minimizes the
/// negative of this; the generator minimizes -mean(critic_fake).
double wasserstein_estimate(std::span<const double> critic_real,
                            std::span<const double> critic_fake);

/// Clamp every critic weight and bias to [-c, c].
void clip_weights(DenseNet& critic, double c);

/// Fresh checkpoint: Glorot-initialized networks (critic clipped to the
/// configured box), zero optimizer state, RNG seeded from the config.
ModelCheckpoint init_model(const GanConfig& config, int encoded_width, std::uint64_t codec_hash);

/// Test/inspection hooks into the training loop. Observers must not mutate
/// anything reachable from the checkpoint.
struct TrainObserver {
  std::function<void(std::int64_t iteration, int critic_step, const DenseNet& critic)>
      after_critic_step;
  std::function<void(std::int64_t iteration, double w_estimate)> after_iteration;
};

/// Run n_iters generator iterations, each n_critic critic updates (fresh
/// real batch without replacement per epoch shuffle, fresh Normal(0,1)
/// latent batch, RMSProp step, clip) followed by one generator update.
/// Returns the per-iteration Wasserstein estimate, taken from the last
/// critic batch of the iteration before its update. Deterministic given
/// the checkpoint state.
std::vector<double> train_iterations(ModelCheckpoint& cp, const Matrix& encoded, int n_iters,
                                     const TrainObserver* observer = nullptr);

/// init_model + train_iterations(config.iterations).
ModelCheckpoint train(const Matrix& encoded, const GanConfig& config, std::uint64_t codec_hash,
                      std::vector<double>* loss_log = nullptr,
                      const TrainObserver* observer = nullptr);

/// Draw n latent vectors with a fresh RNG stream (independent of the
/// training stream), run the generator, and decode every row. Throws
/// CodecMismatch if the codec is not the one the checkpoint was trained
/// with.
FeatureMatrix sample(const ModelCheckpoint& cp, const Codec& codec, int n, std::uint64_t seed);

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const ModelCheckpoint& cp, const std::filesystem::path& path);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

std::string loss_log_csv(std::span<const double> w_estimates);

}  // namespace sleepsynth
