#pragma once

// Cross- and distribution-aligned VAEs over M >= 2 feature modalities.
//
// Conventions (all losses are minimization objectives, batch means of
// per-sample sums):
//   VAE  = sum_i [ ||x_i - D_i(z_i)||^2 + eps * KL(N(mu_i, sigma_i) || N(0, I)) ]
//          z_i = mu_i + sigma_i * noise_i, squared error stands in for -log p(x|z)
//   CA   = sum_i sum_{j != i} ||x_j - D_j(mu_i)||_1      (latent means, no sampling)
//   DA   = sum_i sum_{j != i} W_ij,
//          W_ij = sqrt(||mu_i - mu_j||^2 + ||sigma_i - sigma_j||^2)
//   CADA = VAE + alpha * CA + beta * DA

#include <cstddef>
#include <span>
#include <vector>

#include "sfd/backbone.hpp"
#include "sfd/nn.hpp"
#include "sfd/tensor.hpp"

namespace sfd::cada {

struct GaussianLatent {
  Tensor mu;     // [B, L]
  Tensor sigma;  // [B, L], > 0
};

struct CadaConfig {
  double epsilon = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  std::size_t latent_dim = 64;
  std::size_t hidden_dim = 128;  // 0 selects purely linear encoder/decoder
  double sigma_floor = 1e-6;

  void validate() const;
};

/// Encoder E_i and decoder D_i of one modality.
struct ModalityCodec {
  std::size_t modality = 0;
  std::vector<Linear> encoder;  // input_dim -> 2 * latent_dim (mu, log sigma)
  std::vector<Linear> decoder;  // latent_dim -> input_dim

  static ModalityCodec make(std::size_t modality, std::size_t input_dim, const CadaConfig& config, Rng& rng);
  static ModalityCodec zeros(std::size_t modality, std::size_t input_dim, const CadaConfig& config);

  std::size_t input_dim() const { return encoder.front().in_features(); }
  std::size_t latent_dim() const { return decoder.front().in_features(); }

  NamedTensors parameters() const;
  ModalityCodec clone() const;
};

/// sigma = max(exp(raw), sigma_floor). Deterministic.
GaussianLatent encode(const Tensor& x, const ModalityCodec& codec, double sigma_floor = 1e-6);
Tensor decode(const Tensor& z, const ModalityCodec& codec);
/// z = mu + sigma * noise
Tensor reparameterize(const GaussianLatent& latent, const Tensor& noise);

/// Per-sample closed-form KL to N(0, I): 0.5 * sum(mu^2 + sigma^2 - 1 - 2 log sigma). [B]
Tensor kl_divergence(const GaussianLatent& latent);
/// Per-sample 2-Wasserstein distance between diagonal Gaussians. [B]
Tensor wasserstein(const GaussianLatent& a, const GaussianLatent& b);

Tensor standard_normal(Shape shape, Rng& rng);

Tensor vae_loss(std::span<const Tensor> inputs, std::span<const ModalityCodec> codecs,
                std::span<const Tensor> noises, const CadaConfig& config);
Tensor cross_alignment_loss(std::span<const Tensor> inputs, std::span<const ModalityCodec> codecs,
                            double sigma_floor = 1e-6);
Tensor distribution_alignment_loss(std::span<const GaussianLatent> latents);

Tensor cada_total_loss(const Tensor& vae, const Tensor& ca, const Tensor& da, const CadaConfig& config);
double cada_total_loss(double vae, double ca, double da, const CadaConfig& config);

/// Concatenation [spatial | frequency]; provenance becomes fused.
EmbeddingBatch fuse(const EmbeddingBatch& aligned_spatial, const EmbeddingBatch& aligned_frequency);

/// One alignment instance: M codecs sharing a config.
class CadaVae {
 public:
  struct Losses {
    Tensor vae;
    Tensor ca;
    Tensor da;
    Tensor total;
  };

  CadaVae() = default;
  CadaVae(std::vector<std::size_t> input_dims, CadaConfig config, Rng& rng);

  const CadaConfig& config() const noexcept { return config_; }
  std::span<const ModalityCodec> codecs() const noexcept { return codecs_; }

  /// Draws one reparameterization sample per modality from `rng`.
  Losses losses(std::span<const Tensor> inputs, Rng& rng) const;

  NamedTensors parameters() const;
  CadaVae clone() const;

 private:
  CadaConfig config_;
  std::vector<ModalityCodec> codecs_;
};

}  // namespace sfd::cada
