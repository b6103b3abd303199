#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "sfd/nn.hpp"
#include "sfd/tensor.hpp"

namespace sfd {

enum class Provenance { spatial, frequency, fused };

const char* to_string(Provenance p) noexcept;

/// [B, D] embeddings tagged with the path that produced them.
struct EmbeddingBatch {
  Tensor values;
  Provenance provenance = Provenance::spatial;

  std::size_t size() const { return values.dim(0); }
  std::size_t dim() const { return values.dim(1); }
};

struct BackboneConfig {
  std::size_t input_channels = 3;
  std::array<std::size_t, 4> stage_channels{16, 32, 64, 128};
  std::size_t embedding_dim = 128;
  std::size_t input_resolution = 32;

  /// Throws ConfigError when embedding_dim differs from the last stage width
  /// or any size is zero.
  void validate() const;

  /// Spatial side of the stage-4 map: four stride-2 stages.
  std::size_t final_resolution() const noexcept;
};

/// One residual stage: conv3x3(stride 2) -> relu -> conv3x3, plus a strided
/// 1x1 projection shortcut, followed by relu.
struct ResidualStage {
  Tensor conv1_weight, conv1_bias;
  Tensor conv2_weight, conv2_bias;
  Tensor skip_weight, skip_bias;

  static ResidualStage make(std::size_t in, std::size_t out, Rng& rng);
  Tensor forward(const Tensor& x) const;
  NamedTensors parameters() const;
  ResidualStage clone() const;
};

/// Four-stage residual CNN followed by global average pooling.
class Backbone {
 public:
  struct Output {
    Tensor feature_map;  // [B, C4, R/16, R/16]
    Tensor pooled;       // [B, C4]
  };

  Backbone() = default;
  Backbone(BackboneConfig config, std::uint64_t seed);

  const BackboneConfig& config() const noexcept { return config_; }

  /// images: [B, input_channels, R, R]. Throws InvalidInput on mismatch.
  Output forward(const Tensor& images) const;

  NamedTensors parameters() const;
  Backbone clone() const;

 private:
  BackboneConfig config_;
  std::array<ResidualStage, 4> stages_;
};

/// Pooled spatial-path embeddings of raw images.
EmbeddingBatch embed_spatial(const Backbone& backbone, const Tensor& images);

/// Pooled frequency-path embeddings; the input carries the original/low/high
/// reconstructions stacked on the channel axis.
EmbeddingBatch embed_frequency(const Backbone& backbone, const Tensor& triplet_images);

}  // namespace sfd
