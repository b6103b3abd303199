#include "sfd/cada_vae.hpp"

#include <cmath>
#include <string>

#include "sfd/error.hpp"
#include "sfd/ops.hpp"

namespace sfd::cada {

namespace {

Tensor run_layers(const std::vector<Linear>& layers, Tensor x) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    x = layers[i].forward(x);
    if (i + 1 < layers.size()) x = ops::relu(x);
  }
  return x;
}

void require_finite(const Tensor& t, const char* what) {
  for (double v : t.data())
    if (!std::isfinite(v)) throw NumericError(std::string(what) + " contains non-finite values");
}

void require_modalities(std::size_t inputs, std::size_t codecs) {
  if (inputs != codecs) throw InvalidInput("one codec per modality input is required");
}

}  // namespace

void CadaConfig::validate() const {
  if (epsilon < 0.0 || alpha < 0.0 || beta < 0.0) throw ConfigError("CADA weights must be non-negative");
  if (latent_dim == 0) throw ConfigError("latent_dim must be positive");
  if (!(sigma_floor > 0.0)) throw ConfigError("sigma_floor must be positive");
}

ModalityCodec ModalityCodec::make(std::size_t modality, std::size_t input_dim, const CadaConfig& config, Rng& rng) {
  ModalityCodec c{modality, {}, {}};
  const std::size_t l = config.latent_dim, h = config.hidden_dim;
  if (h > 0) {
    c.encoder = {Linear::make(input_dim, h, rng), Linear::make(h, 2 * l, rng)};
    c.decoder = {Linear::make(l, h, rng), Linear::make(h, input_dim, rng)};
  } else {
    c.encoder = {Linear::make(input_dim, 2 * l, rng)};
    c.decoder = {Linear::make(l, input_dim, rng)};
  }
  // Start near the prior: small mean and log-sigma outputs.
  for (auto& v : c.encoder.back().weight.mutable_data()) v *= 0.1;
  return c;
}

ModalityCodec ModalityCodec::zeros(std::size_t modality, std::size_t input_dim, const CadaConfig& config) {
  ModalityCodec c{modality, {}, {}};
  const std::size_t l = config.latent_dim, h = config.hidden_dim;
  if (h > 0) {
    c.encoder = {Linear::zeros(input_dim, h), Linear::zeros(h, 2 * l)};
    c.decoder = {Linear::zeros(l, h), Linear::zeros(h, input_dim)};
  } else {
    c.encoder = {Linear::zeros(input_dim, 2 * l)};
    c.decoder = {Linear::zeros(l, input_dim)};
  }
  return c;
}

NamedTensors ModalityCodec::parameters() const {
  NamedTensors out;
  for (std::size_t i = 0; i < encoder.size(); ++i) append_prefixed(out, "encoder" + std::to_string(i), encoder[i].parameters());
  for (std::size_t i = 0; i < decoder.size(); ++i) append_prefixed(out, "decoder" + std::to_string(i), decoder[i].parameters());
  return out;
}

ModalityCodec ModalityCodec::clone() const {
  ModalityCodec c{modality, {}, {}};
  for (const auto& l : encoder) c.encoder.push_back(l.clone());
  for (const auto& l : decoder) c.decoder.push_back(l.clone());
  return c;
}

GaussianLatent encode(const Tensor& x, const ModalityCodec& codec, double sigma_floor) {
  if (x.rank() != 2 || x.dim(1) != codec.input_dim()) {
    throw InvalidInput("encode: codec expects [B, " + std::to_string(codec.input_dim()) + "], got " +
                       shape_string(x.shape()));
  }
  auto stats = run_layers(codec.encoder, x);
  const std::size_t l = codec.latent_dim();
  auto mu = ops::slice_cols(stats, 0, l);
  auto sigma = ops::clamp_min(ops::exp(ops::slice_cols(stats, l, 2 * l)), sigma_floor);
  return {mu, sigma};
}

Tensor decode(const Tensor& z, const ModalityCodec& codec) {
  if (z.rank() != 2 || z.dim(1) != codec.latent_dim()) {
    throw InvalidInput("decode: codec expects latent width " + std::to_string(codec.latent_dim()));
  }
  return run_layers(codec.decoder, z);
}

Tensor reparameterize(const GaussianLatent& latent, const Tensor& noise) {
  if (noise.shape() != latent.mu.shape() || latent.sigma.shape() != latent.mu.shape()) {
    throw InvalidInput("reparameterize: noise " + shape_string(noise.shape()) + " does not match latent " +
                       shape_string(latent.mu.shape()));
  }
  return ops::add(latent.mu, ops::mul(latent.sigma, noise));
}

Tensor kl_divergence(const GaussianLatent& latent) {
  auto terms = ops::sub(ops::add(ops::square(latent.mu), ops::square(latent.sigma)),
                        ops::add_scalar(ops::scale(ops::log(latent.sigma), 2.0), 1.0));
  return ops::scale(ops::sum_rows(terms), 0.5);
}

Tensor wasserstein(const GaussianLatent& a, const GaussianLatent& b) {
  if (a.mu.shape() != b.mu.shape() || a.sigma.shape() != b.sigma.shape()) {
    throw InvalidInput("wasserstein: latent shapes differ");
  }
  auto mean_term = ops::sum_rows(ops::square(ops::sub(a.mu, b.mu)));
  // Sigma^(1/2) of a diagonal covariance diag(sigma^2) is diag(sigma).
  auto cov_term = ops::sum_rows(ops::square(ops::sub(a.sigma, b.sigma)));
  return ops::sqrt(ops::add(mean_term, cov_term));
}

Tensor standard_normal(Shape shape, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = dist(rng);
  return Tensor::from(std::move(shape), std::move(v));
}

Tensor vae_loss(std::span<const Tensor> inputs, std::span<const ModalityCodec> codecs,
                std::span<const Tensor> noises, const CadaConfig& config) {
  if (inputs.empty()) throw InvalidInput("vae_loss: at least one modality is required");
  require_modalities(inputs.size(), codecs.size());
  if (noises.size() != inputs.size()) throw InvalidInput("vae_loss: one noise tensor per modality is required");
  Tensor total = Tensor::scalar(0.0);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    require_finite(inputs[i], "vae_loss input");
    auto latent = encode(inputs[i], codecs[i], config.sigma_floor);
    auto recon = decode(reparameterize(latent, noises[i]), codecs[i]);
    auto sq_err = ops::mean(ops::sum_rows(ops::square(ops::sub(inputs[i], recon))));
    auto kl = ops::mean(kl_divergence(latent));
    total = ops::add(total, ops::add(sq_err, ops::scale(kl, config.epsilon)));
  }
  return total;
}

Tensor cross_alignment_loss(std::span<const Tensor> inputs, std::span<const ModalityCodec> codecs, double sigma_floor) {
  if (inputs.size() < 2) throw ConfigError("cross-alignment needs at least two modalities");
  require_modalities(inputs.size(), codecs.size());
  std::vector<GaussianLatent> latents;
  for (std::size_t i = 0; i < inputs.size(); ++i) latents.push_back(encode(inputs[i], codecs[i], sigma_floor));
  Tensor total = Tensor::scalar(0.0);
  for (std::size_t i = 0; i < inputs.size(); ++i)
    for (std::size_t j = 0; j < inputs.size(); ++j) {
      if (i == j) continue;
      auto cross = decode(latents[i].mu, codecs[j]);
      if (cross.shape() != inputs[j].shape()) throw InvalidInput("cross_alignment_loss: modality shapes differ");
      total = ops::add(total, ops::mean(ops::sum_rows(ops::abs(ops::sub(inputs[j], cross)))));
    }
  return total;
}

Tensor distribution_alignment_loss(std::span<const GaussianLatent> latents) {
  Tensor total = Tensor::scalar(0.0);
  for (std::size_t i = 0; i < latents.size(); ++i)
    for (std::size_t j = 0; j < latents.size(); ++j) {
      if (i == j) continue;
      total = ops::add(total, ops::mean(wasserstein(latents[i], latents[j])));
    }
  return total;
}

Tensor cada_total_loss(const Tensor& vae, const Tensor& ca, const Tensor& da, const CadaConfig& config) {
  return ops::add(vae, ops::add(ops::scale(ca, config.alpha), ops::scale(da, config.beta)));
}

double cada_total_loss(double vae, double ca, double da, const CadaConfig& config) {
  return vae + config.alpha * ca + config.beta * da;
}

EmbeddingBatch fuse(const EmbeddingBatch& aligned_spatial, const EmbeddingBatch& aligned_frequency) {
  if (!aligned_spatial.values.defined() || !aligned_frequency.values.defined()) {
    throw InvalidInput("fuse: both spatial and frequency branches are required");
  }
  if (aligned_spatial.provenance != Provenance::spatial || aligned_frequency.provenance != Provenance::frequency) {
    throw InvalidInput(std::string("fuse: expected (spatial, frequency) inputs, got (") +
                       to_string(aligned_spatial.provenance) + ", " + to_string(aligned_frequency.provenance) + ")");
  }
  return {ops::concat_cols(aligned_spatial.values, aligned_frequency.values), Provenance::fused};
}

CadaVae::CadaVae(std::vector<std::size_t> input_dims, CadaConfig config, Rng& rng) : config_(config) {
  config_.validate();
  if (input_dims.size() < 2) throw ConfigError("CADA-VAE needs at least two modalities");
  for (std::size_t i = 0; i < input_dims.size(); ++i) codecs_.push_back(ModalityCodec::make(i, input_dims[i], config_, rng));
}

CadaVae::Losses CadaVae::losses(std::span<const Tensor> inputs, Rng& rng) const {
  require_modalities(inputs.size(), codecs_.size());
  std::vector<Tensor> noises;
  for (const auto& x : inputs) noises.push_back(standard_normal({x.dim(0), config_.latent_dim}, rng));
  auto vae = vae_loss(inputs, codecs_, noises, config_);
  auto ca = cross_alignment_loss(inputs, codecs_, config_.sigma_floor);
  std::vector<GaussianLatent> latents;
  for (std::size_t i = 0; i < inputs.size(); ++i) latents.push_back(encode(inputs[i], codecs_[i], config_.sigma_floor));
  auto da = distribution_alignment_loss(latents);
  return {vae, ca, da, cada_total_loss(vae, ca, da, config_)};
}

NamedTensors CadaVae::parameters() const {
  NamedTensors out;
  for (const auto& c : codecs_) append_prefixed(out, "codec" + std::to_string(c.modality), c.parameters());
  return out;
}

CadaVae CadaVae::clone() const {
  CadaVae v;
  v.config_ = config_;
  for (const auto& c : codecs_) v.codecs_.push_back(c.clone());
  return v;
}

}  // namespace sfd::cada
