#pragma once

#include <span>
#include <string>
#include <vector>

#include "sleepsynth/matrix.hpp"
#include "sleepsynth/temporalize.hpp"

#include <json.hpp>

namespace sleepsynth {

/// Description of one schema column in the numeric (GAN-facing) space.
/// Continuous columns scale linearly from fixed bounds to [-1, 1];
/// categorical columns expand to a one-hot block with a fixed category
/// order.
struct ColumnSpec {
  enum class Kind { continuous, categorical };

  std::string name;
  Kind kind = Kind::continuous;
  double lo = 0.0;  // continuous only, lo < hi
  double hi = 0.0;
  std::vector<std::string> categories;  // categorical only, >= 2 entries

  int width() const {
    return kind == Kind::continuous ? 1 : static_cast<int>(categories.size());
  }

  bool operator==(const ColumnSpec&) const = default;
};

/// Fitted, immutable mapping between the 34-column schema and the encoded
/// numeric space. For this schema: 31 continuous columns (30 sleep + age)
/// and 3 categorical blocks (sex 2, day 7, month 12), encoded_width 52.
struct Codec {
  std::vector<ColumnSpec> specs;
  int encoded_width = 0;

  bool operator==(const Codec&) const = default;
};

/// Build the codec for the feature schema. Bounds and category lists are
/// fixed by the schema (sleep [0,60], age [15,120], full enumerations),
/// not derived from the data, so any two valid matrices produce the same
/// codec. The matrix argument only gates on emptiness.
Codec fit_codec(const FeatureMatrix& matrix);

/// Continuous x -> 2*(x-lo)/(hi-lo) - 1; categorical -> one-hot block.
/// Throws DomainError for out-of-bounds values.
std::vector<double> encode(const Codec& codec, const FeatureRow& row);

/// Encode all rows into a [n x encoded_width] matrix (row-parallel).
Matrix encode_matrix(const Codec& codec, const FeatureMatrix& matrix);

/// Inverse of encode, total over any real vector of the right length:
/// continuous values are clamped to [lo, hi] (sleep and age then rounded
/// to integers), categorical blocks decode by argmax with ties broken
/// toward the lowest index.
FeatureRow decode(const Codec& codec, std::span<const double> encoded);

FeatureMatrix decode_matrix(const Codec& codec, const Matrix& encoded);

nlohmann::json codec_to_json(const Codec& codec);
Codec codec_from_json(const nlohmann::json& j);

void save_codec(const Codec& codec, const std::filesystem::path& path);
Codec load_codec(const std::filesystem::path& path);

/// FNV-1a over the serialized form; lets a checkpoint pin the codec it
/// was trained with.
std::uint64_t codec_hash(const Codec& codec);

}  // namespace sleepsynth
