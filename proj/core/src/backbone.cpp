#include "sfd/backbone.hpp"

#include <string>

#include "sfd/error.hpp"
#include "sfd/ops.hpp"

namespace sfd {

const char* to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::spatial: return "spatial";
    case Provenance::frequency: return "frequency";
    case Provenance::fused: return "fused";
  }
  return "unknown";
}

void BackboneConfig::validate() const {
  if (input_channels == 0 || input_resolution == 0) throw ConfigError("backbone sizes must be positive");
  for (auto c : stage_channels)
    if (c == 0) throw ConfigError("backbone stage channel counts must be positive");
  if (embedding_dim != stage_channels.back()) {
    throw ConfigError("embedding_dim " + std::to_string(embedding_dim) + " must equal the last stage width " +
                      std::to_string(stage_channels.back()));
  }
}

std::size_t BackboneConfig::final_resolution() const noexcept {
  std::size_t r = input_resolution;
  // 3x3 kernel, padding 1, stride 2.
  for (int i = 0; i < 4; ++i) r = (r + 2 - 3) / 2 + 1;
  return r;
}

ResidualStage ResidualStage::make(std::size_t in, std::size_t out, Rng& rng) {
  ResidualStage s;
  s.conv1_weight = he_normal({out, in, 3, 3}, in * 9, rng);
  s.conv1_bias = Tensor::zeros({out}, true);
  s.conv2_weight = he_normal({out, out, 3, 3}, out * 9, rng);
  // Keeps the residual branch small at initialization.
  for (auto& v : s.conv2_weight.mutable_data()) v *= 0.5;
  s.conv2_bias = Tensor::zeros({out}, true);
  s.skip_weight = he_normal({out, in, 1, 1}, in, rng);
  s.skip_bias = Tensor::zeros({out}, true);
  return s;
}

Tensor ResidualStage::forward(const Tensor& x) const {
  auto h = ops::relu(ops::conv2d(x, conv1_weight, conv1_bias, 2, 1));
  h = ops::conv2d(h, conv2_weight, conv2_bias, 1, 1);
  auto skip = ops::conv2d(x, skip_weight, skip_bias, 2, 0);
  return ops::relu(ops::add(h, skip));
}

NamedTensors ResidualStage::parameters() const {
  return {{"conv1.weight", conv1_weight}, {"conv1.bias", conv1_bias}, {"conv2.weight", conv2_weight},
          {"conv2.bias", conv2_bias},     {"skip.weight", skip_weight}, {"skip.bias", skip_bias}};
}

ResidualStage ResidualStage::clone() const {
  return {conv1_weight.clone(), conv1_bias.clone(), conv2_weight.clone(),
          conv2_bias.clone(),   skip_weight.clone(), skip_bias.clone()};
}

Backbone::Backbone(BackboneConfig config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  std::size_t in = config_.input_channels;
  for (std::size_t i = 0; i < 4; ++i) {
    stages_[i] = ResidualStage::make(in, config_.stage_channels[i], rng);
    in = config_.stage_channels[i];
  }
}

Backbone::Output Backbone::forward(const Tensor& images) const {
  if (images.rank() != 4 || images.dim(1) != config_.input_channels ||
      images.dim(2) != config_.input_resolution || images.dim(3) != config_.input_resolution) {
    throw InvalidInput("backbone expects [B, " + std::to_string(config_.input_channels) + ", " +
                       std::to_string(config_.input_resolution) + ", " + std::to_string(config_.input_resolution) +
                       "], got " + shape_string(images.shape()));
  }
  Tensor x = images;
  for (const auto& stage : stages_) x = stage.forward(x);
  return {x, ops::global_avg_pool(x)};
}

NamedTensors Backbone::parameters() const {
  NamedTensors out;
  for (std::size_t i = 0; i < 4; ++i) append_prefixed(out, "stage" + std::to_string(i + 1), stages_[i].parameters());
  return out;
}

Backbone Backbone::clone() const {
  Backbone b;
  b.config_ = config_;
  for (std::size_t i = 0; i < 4; ++i) b.stages_[i] = stages_[i].clone();
  return b;
}

EmbeddingBatch embed_spatial(const Backbone& backbone, const Tensor& images) {
  return {backbone.forward(images).pooled, Provenance::spatial};
}

EmbeddingBatch embed_frequency(const Backbone& backbone, const Tensor& triplet_images) {
  if (triplet_images.rank() == 4 && triplet_images.dim(1) % 3 != 0) {
    throw InvalidInput("frequency input must stack original/low/high planes; channel count " +
                       std::to_string(triplet_images.dim(1)) + " is not a multiple of 3");
  }
  return {backbone.forward(triplet_images).pooled, Provenance::frequency};
}

}  // namespace sfd
