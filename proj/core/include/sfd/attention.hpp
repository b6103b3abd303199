#pragma once

// Channel attention gates used inside each feature path.
//
// SE:  w = sigmoid(relu(s R) E), s = global average pool of the input.
// Fca: same excitation, but s[c] is the projection of channel c onto the 2D
//      DCT basis function of its frequency group:
//        s[c] = sum_{m,n} x[c,m,n] C_H(k) C_W(l) cos((2m+1)k pi/2H) cos((2n+1)l pi/2W)
//      For (k,l) = (0,0) this is GAP * sqrt(H*W), see dc_squeeze_factor().

#include <cstddef>
#include <vector>

#include "sfd/nn.hpp"
#include "sfd/tensor.hpp"

namespace sfd::attention {

struct SEGateParams {
  Tensor reduce;  // [C, C/r]
  Tensor expand;  // [C/r, C]
  std::size_t reduction = 4;

  /// Throws ConfigError unless r divides C.
  static SEGateParams make(std::size_t channels, std::size_t reduction, Rng& rng);
  static SEGateParams zeros(std::size_t channels, std::size_t reduction);

  std::size_t channels() const { return reduce.dim(0); }
  NamedTensors parameters() const;
  SEGateParams clone() const;
};

struct FrequencyIndex {
  std::size_t k = 0;
  std::size_t l = 0;
  friend bool operator==(const FrequencyIndex&, const FrequencyIndex&) = default;
};

/// The `count` indices with smallest k + l (ties by k) valid for an h x w map.
std::vector<FrequencyIndex> lowest_frequency_indices(std::size_t count, std::size_t h, std::size_t w);

struct FcaGateParams {
  /// One index per channel group; channels split into equal contiguous groups.
  std::vector<FrequencyIndex> frequency_indices{{0, 0}};
  SEGateParams excitation;

  static FcaGateParams make(std::size_t channels, std::size_t reduction, std::vector<FrequencyIndex> indices,
                            Rng& rng);

  std::size_t channels() const { return excitation.channels(); }
  /// Frequency group of channel c.
  std::size_t group_of(std::size_t c) const;
  /// [C, h, w] projection basis. Throws InvalidInput for indices outside the map.
  Tensor basis(std::size_t h, std::size_t w) const;

  NamedTensors parameters() const { return excitation.parameters(); }
  FcaGateParams clone() const { return {frequency_indices, excitation.clone()}; }
};

/// GAP-to-DC-squeeze ratio for an h x w map: sqrt(h * w).
double dc_squeeze_factor(std::size_t h, std::size_t w);

/// Excitation weights in (0, 1) from a [B, C] squeeze vector.
Tensor excitation(const Tensor& squeezed, const SEGateParams& params);

/// Accepts [B, C] vectors or [B, C, H, W] maps; returns input * weights.
Tensor se_gate(const Tensor& features, const SEGateParams& params);
/// [B, C, H, W] -> [B, C] DCT-basis squeeze.
Tensor fca_squeeze(const Tensor& features, const FcaGateParams& params);
/// [B, C, H, W] -> [B, C, H, W] reweighted by Fca gates.
Tensor fca_gate(const Tensor& features, const FcaGateParams& params);

struct AfaBranches {
  Tensor se_features;   // [B, C]
  Tensor fca_features;  // [B, C]
};

/// SE gates the pooled vector; Fca gates the pre-pooling map, which is then
/// pooled. Both branches come out as [B, C].
AfaBranches afa_weight(const Tensor& feature_map, const SEGateParams& se, const FcaGateParams& fca);

/// The SE + Fca pair owned by one feature path.
struct AttentionPair {
  SEGateParams se;
  FcaGateParams fca;

  static AttentionPair make(std::size_t channels, std::size_t reduction, std::vector<FrequencyIndex> indices,
                            Rng& rng);
  AfaBranches forward(const Tensor& feature_map) const { return afa_weight(feature_map, se, fca); }
  NamedTensors parameters() const;
  AttentionPair clone() const { return {se.clone(), fca.clone()}; }
};

}  // namespace sfd::attention
