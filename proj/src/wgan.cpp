#include "sleepsynth/wgan.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

#include "sleepsynth/kernels.hpp"

namespace sleepsynth {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(errc::config_error, what);
}

std::vector<int> widths_from_json(const nlohmann::json& j, const char* key) {
  std::vector<int> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number_integer()) throw Error(errc::config_error, std::string(key) + " entries must be integers");
    out.push_back(v.get<int>());
  }
  return out;
}

}  // namespace

void GanConfig::validate() const {
  require(latent_dim >= 1, "latent_dim must be >= 1");
  for (int w : generator_hidden) require(w >= 1, "generator_hidden widths must be >= 1");
  for (int w : critic_hidden) require(w >= 1, "critic_hidden widths must be >= 1");
  require(n_critic >= 1, "n_critic must be >= 1");
  require(clip_c > 0.0, "clip_c must be > 0");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(learning_rate > 0.0, "learning_rate must be > 0");
  require(rho > 0.0 && rho < 1.0, "rho must be in (0, 1)");
  require(epsilon > 0.0, "epsilon must be > 0");
  require(iterations >= 0, "iterations must be >= 0");
}

nlohmann::json gan_config_to_json(const GanConfig& config) {
  return nlohmann::json{
      {"latent_dim", config.latent_dim},
      {"generator_hidden", config.generator_hidden},
      {"critic_hidden", config.critic_hidden},
      {"n_critic", config.n_critic},
      {"clip_c", config.clip_c},
      {"batch_size", config.batch_size},
      {"learning_rate", config.learning_rate},
      {"rho", config.rho},
      {"epsilon", config.epsilon},
      {"iterations", config.iterations},
      {"seed", config.seed},
  };
}

GanConfig gan_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(errc::config_error, "GAN config must be a JSON object");
  GanConfig config;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "latent_dim") config.latent_dim = value.get<int>();
      else if (key == "generator_hidden") config.generator_hidden = widths_from_json(j, "generator_hidden");
      else if (key == "critic_hidden") config.critic_hidden = widths_from_json(j, "critic_hidden");
      else if (key == "n_critic") config.n_critic = value.get<int>();
      else if (key == "clip_c") config.clip_c = value.get<double>();
      else if (key == "batch_size") config.batch_size = value.get<int>();
      else if (key == "learning_rate") config.learning_rate = value.get<double>();
      else if (key == "rho") config.rho = value.get<double>();
      else if (key == "epsilon") config.epsilon = value.get<double>();
      else if (key == "iterations") config.iterations = value.get<int>();
      else if (key == "seed") config.seed = value.get<std::uint64_t>();
      else throw Error(errc::config_error, "unknown GAN config key: " + key);
    } catch (const nlohmann::json::exception&) {
      throw Error(errc::config_error, "bad value for GAN config key: " + key);
    }
  }
  config.validate();
  return config;
}

GanConfig load_gan_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::config_error, path.string() + ": " + e.what());
  }
  return gan_config_from_json(j);
}

double wasserstein_estimate(std::span<const double> critic_real,
                            std::span<const double> critic_fake) {
  if (critic_real.empty() || critic_fake.empty())
    throw Error(errc::empty_batch, "wasserstein_estimate needs non-empty score vectors");
  const double real = std::accumulate(critic_real.begin(), critic_real.end(), 0.0) /
                      static_cast<double>(critic_real.size());
  const double fake = std::accumulate(critic_fake.begin(), critic_fake.end(), 0.0) /
                      static_cast<double>(critic_fake.size());
  return real - fake;
}

void clip_weights(DenseNet& critic, double c) {
  if (c <= 0.0) throw Error(errc::config_error, "clip bound must be > 0");
  for (auto& layer : critic.layers) {
    for (double& w : layer.weights.data) w = std::clamp(w, -c, c);
    for (double& b : layer.bias) b = std::clamp(b, -c, c);
  }
}

namespace {

std::vector<int> full_widths(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> widths;
  widths.reserve(hidden.size() + 2);
  widths.push_back(in);
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(out);
  return widths;
}

std::vector<Activation> hidden_relu_then(std::size_t n_layers, Activation head) {
  std::vector<Activation> acts(n_layers, Activation::relu);
  acts.back() = head;
  return acts;
}

}  // namespace

ModelCheckpoint init_model(const GanConfig& config, int encoded_width, std::uint64_t codec_hash) {
  config.validate();
  if (encoded_width < 1) throw Error(errc::config_error, "encoded_width must be >= 1");
  ModelCheckpoint cp;
  cp.config = config;
  cp.codec_hash = codec_hash;
  cp.encoded_width = encoded_width;
  Rng rng(config.seed);
  const auto gen_widths = full_widths(config.latent_dim, config.generator_hidden, encoded_width);
  const auto critic_widths = full_widths(encoded_width, config.critic_hidden, 1);
  cp.generator = make_dense_net(gen_widths, hidden_relu_then(gen_widths.size() - 1, Activation::tanh), rng);
  cp.critic = make_dense_net(critic_widths, hidden_relu_then(critic_widths.size() - 1, Activation::identity), rng);
  clip_weights(cp.critic, config.clip_c);
  cp.generator_acc = zeros_like(cp.generator);
  cp.critic_acc = zeros_like(cp.critic);
  cp.rng_state = rng.state();
  return cp;
}

namespace {

std::uint64_t epoch_seed(std::uint64_t seed, std::int64_t epoch) {
  return mix64(seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(epoch + 1));
}

/// Without-replacement batches over the real data. Each epoch's permutation
/// is a pure function of (seed, epoch), so (epoch, cursor) is the complete
/// sampler state; a partial tail shorter than one batch is dropped.
class EpochSampler {
 public:
  EpochSampler(std::uint64_t seed, int n_rows, int batch_size, std::int64_t epoch,
               std::int64_t cursor)
      : seed_(seed), batch_size_(batch_size), epoch_(epoch), cursor_(cursor) {
    perm_.resize(static_cast<std::size_t>(n_rows));
    usable_ = static_cast<std::int64_t>(n_rows / batch_size) * batch_size;
    regenerate();
    normalize();
  }

  Matrix next_batch(const Matrix& encoded) {
    Matrix batch(batch_size_, encoded.cols);
    for (int i = 0; i < batch_size_; ++i) {
      const int src = perm_[static_cast<std::size_t>(cursor_ + i)];
      std::copy_n(encoded.row(src), encoded.cols, batch.row(i));
    }
    cursor_ += batch_size_;
    normalize();
    return batch;
  }

  std::int64_t epoch() const { return epoch_; }
  std::int64_t cursor() const { return cursor_; }

 private:
  void regenerate() {
    std::iota(perm_.begin(), perm_.end(), 0);
    Rng rng(epoch_seed(seed_, epoch_));
    rng.shuffle(perm_);
  }

  void normalize() {
    if (cursor_ >= usable_) {
      ++epoch_;
      cursor_ = 0;
      regenerate();
    }
  }

  std::uint64_t seed_;
  int batch_size_;
  std::int64_t epoch_;
  std::int64_t cursor_;
  std::int64_t usable_;
  std::vector<int> perm_;
};

Matrix latent_batch(Rng& rng, int n, int latent_dim) {
  Matrix z(n, latent_dim);
  for (double& v : z.data) v = rng.normal(0.0, 1.0);
  return z;
}

Matrix constant_column(int n, double value) {
  Matrix m(n, 1);
  std::fill(m.data.begin(), m.data.end(), value);
  return m;
}

void add_into(std::vector<LayerTensors>& dst, const std::vector<LayerTensors>& src) {
  for (std::size_t l = 0; l < dst.size(); ++l) {
    for (std::size_t i = 0; i < dst[l].w.data.size(); ++i) dst[l].w.data[i] += src[l].w.data[i];
    for (std::size_t i = 0; i < dst[l].b.size(); ++i) dst[l].b[i] += src[l].b[i];
  }
}

}  // namespace

std::vector<double> train_iterations(ModelCheckpoint& cp, const Matrix& encoded, int n_iters,
                                     const TrainObserver* observer) {
  cp.config.validate();
  if (n_iters < 0) throw Error(errc::config_error, "iteration count must be >= 0");
  if (encoded.cols != cp.encoded_width)
    throw Error(errc::shape_mismatch, "encoded matrix width does not match checkpoint");
  if (encoded.rows < cp.config.batch_size)
    throw Error(errc::insufficient_data, "need at least batch_size rows to train");
  for (double v : encoded.data)
    if (!std::isfinite(v))
      throw Error(errc::non_finite_gradient, "encoded matrix contains non-finite values");

  const int b = cp.config.batch_size;
  const double lr = cp.config.learning_rate;
  const double rho = cp.config.rho;
  const double eps = cp.config.epsilon;

  Rng rng(0);
  rng.set_state(cp.rng_state);
  EpochSampler sampler(cp.config.seed, encoded.rows, b, cp.epoch, cp.cursor);

  // Upstream gradients of the two losses w.r.t. critic outputs:
  // critic loss mean(fake) - mean(real), generator loss -mean(fake).
  const Matrix up_real = constant_column(b, -1.0 / b);
  const Matrix up_fake = constant_column(b, 1.0 / b);
  const Matrix up_gen = constant_column(b, -1.0 / b);

  std::vector<double> log;
  log.reserve(static_cast<std::size_t>(n_iters));

  for (int it = 0; it < n_iters; ++it) {
    try {
      double w_last = 0.0;
      for (int k = 0; k < cp.config.n_critic; ++k) {
        const Matrix real = sampler.next_batch(encoded);
        const Matrix z = latent_batch(rng, b, cp.config.latent_dim);
        const Matrix fake = forward(cp.generator, z);
        ForwardCache real_cache, fake_cache;
        const Matrix score_real = forward(cp.critic, real, &real_cache);
        const Matrix score_fake = forward(cp.critic, fake, &fake_cache);
        w_last = wasserstein_estimate(score_real.data, score_fake.data);
        Gradients grads = backward(cp.critic, real_cache, up_real);
        const Gradients fake_grads = backward(cp.critic, fake_cache, up_fake);
        add_into(grads.layers, fake_grads.layers);
        rmsprop_step(cp.critic, grads, cp.critic_acc, rho, lr, eps);
        clip_weights(cp.critic, cp.config.clip_c);
        if (observer && observer->after_critic_step)
          observer->after_critic_step(cp.iteration, k, cp.critic);
      }

      const Matrix z = latent_batch(rng, b, cp.config.latent_dim);
      ForwardCache gen_cache;
      const Matrix fake = forward(cp.generator, z, &gen_cache);
      ForwardCache critic_cache;
      forward(cp.critic, fake, &critic_cache);
      const Gradients critic_grads = backward(cp.critic, critic_cache, up_gen);
      const Gradients gen_grads = backward(cp.generator, gen_cache, critic_grads.input);
      rmsprop_step(cp.generator, gen_grads, cp.generator_acc, rho, lr, eps);

      ++cp.iteration;
      log.push_back(w_last);
      if (observer && observer->after_iteration) observer->after_iteration(cp.iteration, w_last);
    } catch (const Error& e) {
      if (e.code() == errc::non_finite_gradient)
        throw Error(errc::non_finite_gradient,
                    "iteration " + std::to_string(cp.iteration) + ": " + e.what());
      throw;
    }
    cp.rng_state = rng.state();
    cp.epoch = sampler.epoch();
    cp.cursor = sampler.cursor();
  }
  return log;
}

ModelCheckpoint train(const Matrix& encoded, const GanConfig& config, std::uint64_t codec_hash,
                      std::vector<double>* loss_log, const TrainObserver* observer) {
  ModelCheckpoint cp = init_model(config, encoded.cols, codec_hash);
  std::vector<double> log = train_iterations(cp, encoded, config.iterations, observer);
  if (loss_log) *loss_log = std::move(log);
  return cp;
}

FeatureMatrix sample(const ModelCheckpoint& cp, const Codec& codec, int n, std::uint64_t seed) {
  if (n < 1) throw Error(errc::config_error, "sample count must be >= 1");
  if (codec_hash(codec) != cp.codec_hash || codec.encoded_width != cp.encoded_width)
    throw Error(errc::codec_mismatch, "codec does not match the one the model was trained with");
  Rng rng(seed);
  const Matrix z = latent_batch(rng, n, cp.config.latent_dim);
  const Matrix encoded = forward(cp.generator, z);
  return decode_matrix(codec, encoded);
}

// ---------------------------------------------------------------------------
// Checkpoint file format, version 1:
//   bytes 0..3   magic "LGS1"
//   bytes 4..7   format version, u32 little-endian
//   bytes 8..15  header length H, u64 little-endian
//   H bytes      JSON header: config, codec_hash, encoded_width, iteration,
//                epoch, cursor, rng_state, and both nets' layer shapes
//   P bytes      all parameters as f64 little-endian, in order: generator
//                weights+bias per layer, critic likewise, then the two
//                RMSProp accumulators in the same order
//   8 bytes      FNV-1a64 of the P payload bytes, u64 little-endian
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'L', 'G', 'S', '1'};

void append_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_u64le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_f64le(std::string& out, double d) {
  append_u64le(out, std::bit_cast<std::uint64_t>(d));
}

std::uint32_t read_u32le(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

double read_f64le(const unsigned char* p) { return std::bit_cast<double>(read_u64le(p)); }

nlohmann::json net_shape_json(const DenseNet& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : net.layers) {
    layers.push_back({{"out", layer.weights.rows},
                      {"in", layer.weights.cols},
                      {"activation", std::string(activation_name(layer.activation))}});
  }
  return layers;
}

DenseNet net_from_shape_json(const nlohmann::json& j) {
  DenseNet net;
  for (const auto& lj : j) {
    Layer layer;
    layer.weights = Matrix(lj.at("out").get<int>(), lj.at("in").get<int>());
    layer.bias.assign(static_cast<std::size_t>(lj.at("out").get<int>()), 0.0);
    layer.activation = activation_from_name(lj.at("activation").get<std::string>());
    net.layers.push_back(std::move(layer));
  }
  return net;
}

void append_net_params(std::string& out, const DenseNet& net) {
  for (const auto& layer : net.layers) {
    for (double w : layer.weights.data) append_f64le(out, w);
    for (double b : layer.bias) append_f64le(out, b);
  }
}

void append_acc_params(std::string& out, const std::vector<LayerTensors>& acc) {
  for (const auto& t : acc) {
    for (double w : t.w.data) append_f64le(out, w);
    for (double b : t.b) append_f64le(out, b);
  }
}

std::size_t net_param_count(const DenseNet& net) {
  std::size_t n = 0;
  for (const auto& layer : net.layers) n += layer.weights.data.size() + layer.bias.size();
  return n;
}

const unsigned char* read_net_params(const unsigned char* p, DenseNet& net) {
  for (auto& layer : net.layers) {
    for (double& w : layer.weights.data) {
      w = read_f64le(p);
      p += 8;
    }
    for (double& b : layer.bias) {
      b = read_f64le(p);
      p += 8;
    }
  }
  return p;
}

const unsigned char* read_acc_params(const unsigned char* p, std::vector<LayerTensors>& acc) {
  for (auto& t : acc) {
    for (double& w : t.w.data) {
      w = read_f64le(p);
      p += 8;
    }
    for (double& b : t.b) {
      b = read_f64le(p);
      p += 8;
    }
  }
  return p;
}

}  // namespace

void save_checkpoint(const ModelCheckpoint& cp, const std::filesystem::path& path) {
  nlohmann::json header{
      {"config", gan_config_to_json(cp.config)},
      {"codec_hash", cp.codec_hash},
      {"encoded_width", cp.encoded_width},
      {"iteration", cp.iteration},
      {"epoch", cp.epoch},
      {"cursor", cp.cursor},
      {"rng_state", cp.rng_state},
      {"generator", net_shape_json(cp.generator)},
      {"critic", net_shape_json(cp.critic)},
  };
  const std::string header_text = header.dump();

  std::string out;
  out.reserve(16 + header_text.size() +
              8 * 2 * (net_param_count(cp.generator) + net_param_count(cp.critic)) + 8);
  out.append(kMagic, 4);
  append_u32le(out, kCheckpointVersion);
  append_u64le(out, header_text.size());
  out += header_text;

  const std::size_t payload_begin = out.size();
  append_net_params(out, cp.generator);
  append_net_params(out, cp.critic);
  append_acc_params(out, cp.generator_acc);
  append_acc_params(out, cp.critic_acc);
  const std::uint64_t checksum = fnv1a64(out.data() + payload_begin, out.size() - payload_begin);
  append_u64le(out, checksum);

  write_file_atomic(path, out);
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string raw = read_text_file(path);
  const auto* bytes = reinterpret_cast<const unsigned char*>(raw.data());

  if (raw.size() < 16 || std::memcmp(raw.data(), kMagic, 4) != 0)
    throw Error(errc::bad_magic, path.string() + ": not a model checkpoint");
  const std::uint32_t version = read_u32le(bytes + 4);
  if (version != kCheckpointVersion)
    throw Error(errc::version_mismatch,
                path.string() + ": checkpoint format version " + std::to_string(version) +
                    ", expected " + std::to_string(kCheckpointVersion));
  const std::uint64_t header_len = read_u64le(bytes + 8);
  if (16 + header_len > raw.size())
    throw Error(errc::checksum_mismatch, path.string() + ": truncated checkpoint header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(raw.substr(16, header_len));
  } catch (const nlohmann::json::exception&) {
    throw Error(errc::checksum_mismatch, path.string() + ": corrupt checkpoint header");
  }

  ModelCheckpoint cp;
  try {
    cp.config = gan_config_from_json(header.at("config"));
    cp.codec_hash = header.at("codec_hash").get<std::uint64_t>();
    cp.encoded_width = header.at("encoded_width").get<int>();
    cp.iteration = header.at("iteration").get<std::int64_t>();
    cp.epoch = header.at("epoch").get<std::int64_t>();
    cp.cursor = header.at("cursor").get<std::int64_t>();
    cp.rng_state = header.at("rng_state").get<std::string>();
    cp.generator = net_from_shape_json(header.at("generator"));
    cp.critic = net_from_shape_json(header.at("critic"));
  } catch (const nlohmann::json::exception&) {
    throw Error(errc::checksum_mismatch, path.string() + ": corrupt checkpoint header");
  }
  cp.generator_acc = zeros_like(cp.generator);
  cp.critic_acc = zeros_like(cp.critic);

  const std::size_t payload_begin = 16 + static_cast<std::size_t>(header_len);
  const std::size_t payload_len =
      8 * 2 * (net_param_count(cp.generator) + net_param_count(cp.critic));
  if (payload_begin + payload_len + 8 != raw.size())
    throw Error(errc::checksum_mismatch, path.string() + ": checkpoint size mismatch");

  const std::uint64_t stored = read_u64le(bytes + payload_begin + payload_len);
  const std::uint64_t actual = fnv1a64(raw.data() + payload_begin, payload_len);
  if (stored != actual)
    throw Error(errc::checksum_mismatch, path.string() + ": checkpoint payload checksum mismatch");

  const unsigned char* p = bytes + payload_begin;
  p = read_net_params(p, cp.generator);
  p = read_net_params(p, cp.critic);
  p = read_acc_params(p, cp.generator_acc);
  read_acc_params(p, cp.critic_acc);
  return cp;
}

std::string loss_log_csv(std::span<const double> w_estimates) {
  std::string out = "iteration,wasserstein_estimate\n";
  for (std::size_t i = 0; i < w_estimates.size(); ++i) {
    out += std::to_string(i + 1);
    out += ',';
    out += format_double(w_estimates[i]);
    out += '\n';
  }
  return out;
}

}  // namespace sleepsynth
