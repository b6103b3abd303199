#include "sfd/attention.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sfd/error.hpp"
#include "sfd/freq.hpp"
#include "sfd/ops.hpp"

namespace sfd::attention {

SEGateParams SEGateParams::make(std::size_t channels, std::size_t reduction, Rng& rng) {
  if (reduction == 0 || channels == 0 || channels % reduction != 0) {
    throw ConfigError("SE reduction ratio " + std::to_string(reduction) + " must divide " +
                      std::to_string(channels) + " channels");
  }
  const std::size_t hidden = channels / reduction;
  return {he_normal({channels, hidden}, channels, rng), he_normal({hidden, channels}, hidden, rng), reduction};
}

SEGateParams SEGateParams::zeros(std::size_t channels, std::size_t reduction) {
  if (reduction == 0 || channels == 0 || channels % reduction != 0) {
    throw ConfigError("SE reduction ratio must divide the channel count");
  }
  const std::size_t hidden = channels / reduction;
  return {Tensor::zeros({channels, hidden}, true), Tensor::zeros({hidden, channels}, true), reduction};
}

NamedTensors SEGateParams::parameters() const { return {{"reduce", reduce}, {"expand", expand}}; }

SEGateParams SEGateParams::clone() const { return {reduce.clone(), expand.clone(), reduction}; }

std::vector<FrequencyIndex> lowest_frequency_indices(std::size_t count, std::size_t h, std::size_t w) {
  std::vector<FrequencyIndex> all;
  for (std::size_t k = 0; k < h; ++k)
    for (std::size_t l = 0; l < w; ++l) all.push_back({k, l});
  std::stable_sort(all.begin(), all.end(), [](const FrequencyIndex& a, const FrequencyIndex& b) {
    return a.k + a.l != b.k + b.l ? a.k + a.l < b.k + b.l : a.k < b.k;
  });
  if (count > all.size()) throw InvalidInput("requested more frequency indices than the map has coefficients");
  all.resize(count);
  return all;
}

FcaGateParams FcaGateParams::make(std::size_t channels, std::size_t reduction, std::vector<FrequencyIndex> indices,
                                  Rng& rng) {
  if (indices.empty() || channels % indices.size() != 0) {
    throw ConfigError("Fca frequency groups must evenly divide " + std::to_string(channels) + " channels");
  }
  return {std::move(indices), SEGateParams::make(channels, reduction, rng)};
}

std::size_t FcaGateParams::group_of(std::size_t c) const {
  const std::size_t per_group = channels() / frequency_indices.size();
  return c / per_group;
}

Tensor FcaGateParams::basis(std::size_t h, std::size_t w) const {
  const std::size_t c = channels();
  if (frequency_indices.empty() || c % frequency_indices.size() != 0) {
    throw InvalidInput("Fca frequency groups must evenly divide the channel count");
  }
  for (const auto& idx : frequency_indices) {
    if (idx.k >= h || idx.l >= w) {
      throw InvalidInput("Fca frequency index (" + std::to_string(idx.k) + "," + std::to_string(idx.l) +
                         ") invalid for a " + std::to_string(h) + "x" + std::to_string(w) + " map");
    }
  }
  std::vector<double> values(c * h * w);
  for (std::size_t ch = 0; ch < c; ++ch) {
    const auto& idx = frequency_indices[group_of(ch)];
    for (std::size_t m = 0; m < h; ++m)
      for (std::size_t n = 0; n < w; ++n)
        values[(ch * h + m) * w + n] = freq::dct_basis(idx.k, m, h) * freq::dct_basis(idx.l, n, w);
  }
  return Tensor::from({c, h, w}, std::move(values));
}

double dc_squeeze_factor(std::size_t h, std::size_t w) { return std::sqrt(static_cast<double>(h * w)); }

Tensor excitation(const Tensor& squeezed, const SEGateParams& params) {
  if (squeezed.rank() != 2 || squeezed.dim(1) != params.channels()) {
    throw InvalidInput("attention gate expects " + std::to_string(params.channels()) + " channels, got " +
                       shape_string(squeezed.shape()));
  }
  return ops::sigmoid(ops::matmul(ops::relu(ops::matmul(squeezed, params.reduce)), params.expand));
}

Tensor se_gate(const Tensor& features, const SEGateParams& params) {
  if (features.rank() == 2) return ops::mul(features, excitation(features, params));
  if (features.rank() == 4) {
    if (features.dim(1) != params.channels()) {
      throw InvalidInput("SE gate expects " + std::to_string(params.channels()) + " channels, got " +
                         shape_string(features.shape()));
    }
    return ops::scale_channels(features, excitation(ops::global_avg_pool(features), params));
  }
  throw InvalidInput("SE gate accepts [B,C] or [B,C,H,W], got " + shape_string(features.shape()));
}

Tensor fca_squeeze(const Tensor& features, const FcaGateParams& params) {
  if (features.rank() != 4 || features.dim(1) != params.channels()) {
    throw InvalidInput("Fca gate expects [B," + std::to_string(params.channels()) + ",H,W], got " +
                       shape_string(features.shape()));
  }
  return ops::channel_project(features, params.basis(features.dim(2), features.dim(3)));
}

Tensor fca_gate(const Tensor& features, const FcaGateParams& params) {
  return ops::scale_channels(features, excitation(fca_squeeze(features, params), params.excitation));
}

AfaBranches afa_weight(const Tensor& feature_map, const SEGateParams& se, const FcaGateParams& fca) {
  auto pooled = ops::global_avg_pool(feature_map);
  return {se_gate(pooled, se), ops::global_avg_pool(fca_gate(feature_map, fca))};
}

AttentionPair AttentionPair::make(std::size_t channels, std::size_t reduction, std::vector<FrequencyIndex> indices,
                                  Rng& rng) {
  auto se = SEGateParams::make(channels, reduction, rng);
  auto fca = FcaGateParams::make(channels, reduction, std::move(indices), rng);
  return {std::move(se), std::move(fca)};
}

NamedTensors AttentionPair::parameters() const {
  NamedTensors out;
  append_prefixed(out, "se", se.parameters());
  append_prefixed(out, "fca", fca.parameters());
  return out;
}

}  // namespace sfd::attention
