#include "sfd/incremental.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "sfd/attention.hpp"
#include "sfd/error.hpp"
#include "sfd/ops.hpp"

namespace sfd::continual {

namespace {

using harness::TaskData;
using translation::PrototypeMemory;
using translation::Translator;
using translation::TranslatorRole;

std::vector<std::vector<std::size_t>> shuffled_batches(std::size_t n, std::size_t batch_size, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < n; i += batch_size) {
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(n, i + batch_size)));
  }
  return out;
}

struct TripletIndices {
  std::vector<std::size_t> anchor, positive, negative;
};

/// One random positive and one random negative per anchor that has both.
TripletIndices sample_triplets(std::span<const int> labels, Rng& rng) {
  TripletIndices t;
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < labels.size(); ++i) by_label[labels[i]].push_back(i);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& same = by_label[labels[i]];
    if (same.size() < 2 || same.size() == labels.size()) continue;
    std::size_t pos = i;
    std::uniform_int_distribution<std::size_t> pick_pos(0, same.size() - 1);
    while (pos == i) pos = same[pick_pos(rng)];
    std::uniform_int_distribution<std::size_t> pick_neg(0, labels.size() - 1);
    std::size_t neg = pick_neg(rng);
    while (labels[neg] == labels[i]) neg = pick_neg(rng);
    t.anchor.push_back(i);
    t.positive.push_back(pos);
    t.negative.push_back(neg);
  }
  return t;
}

std::vector<int> labels_of(const TaskData& data, std::span<const std::size_t> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(data.labels[i]);
  return out;
}

Tensor metric_loss(const Tensor& embeddings, const TripletIndices& t, double margin) {
  auto normalized = ops::l2_normalize_rows(embeddings);
  return triplet_loss(ops::gather_rows(normalized, t.anchor), ops::gather_rows(normalized, t.positive),
                      ops::gather_rows(normalized, t.negative), margin);
}

Eigen::MatrixXd to_matrix(const Tensor& t) {
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  return Eigen::Map<const RowMat>(t.data().data(), static_cast<Eigen::Index>(t.dim(0)),
                                  static_cast<Eigen::Index>(t.dim(1)));
}

Tensor to_tensor(const Eigen::MatrixXd& m) {
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMat r = m;
  return Tensor::from({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())},
                      std::vector<double>(r.data(), r.data() + r.size()));
}

/// Runs `embed_batch` over `data` in evaluation mode and stacks the rows.
template <typename F>
Eigen::MatrixXd embed_all(const TaskData& data, std::size_t resolution, std::size_t batch_size, F&& embed_batch) {
  NoGradGuard guard;
  Eigen::MatrixXd out;
  for (std::size_t begin = 0; begin < data.size(); begin += batch_size) {
    std::vector<std::size_t> idx(std::min(batch_size, data.size() - begin));
    std::iota(idx.begin(), idx.end(), begin);
    Tensor z = embed_batch(harness::preprocess_eval(data, idx, resolution));
    if (out.size() == 0) out.resize(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(z.dim(1)));
    out.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(idx.size())) = to_matrix(z);
  }
  return out;
}

void check_loss(double v, std::size_t task, std::size_t epoch, const char* what) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string(what) + " became non-finite at task " + std::to_string(task + 1) + ", epoch " +
                       std::to_string(epoch + 1));
  }
}

/// Triplet training of `embed_batch` outputs; shared by the warm start of every learner.
template <typename F>
std::vector<double> train_metric(const NamedTensors& params, F&& embed_batch, const TaskData& data, std::size_t epochs,
                                 double learning_rate, std::size_t batch_size, double margin, std::size_t resolution,
                                 const harness::Augmentation& augmentation, Rng& rng) {
  Adam optimizer(params, {learning_rate});
  std::vector<double> losses;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    double total = 0.0;
    std::size_t steps = 0;
    for (const auto& batch : shuffled_batches(data.size(), batch_size, rng)) {
      auto triplets = sample_triplets(labels_of(data, batch), rng);
      if (triplets.anchor.empty()) continue;
      Tensor loss = metric_loss(embed_batch(harness::preprocess_train(data, batch, resolution, augmentation, rng)),
                                triplets, margin);
      if (!std::isfinite(loss.item())) throw NumericError("pretraining loss became non-finite at epoch " + std::to_string(epoch + 1));
      optimizer.zero_grad();
      loss.backward();
      optimizer.step();
      total += loss.item();
      ++steps;
    }
    losses.push_back(steps ? total / static_cast<double>(steps) : 0.0);
  }
  return losses;
}

void add_task_prototypes(PrototypeMemory& memory, const Eigen::MatrixXd& features, std::span<const int> labels,
                         std::size_t task) {
  for (auto& [c, p] : translation::compute_prototypes(features, labels)) memory.set(c, p, static_cast<int>(task));
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Embedding network baselines: a spatial backbone whose L2-normalized pooled
// features are trained with the triplet loss plus an optional regularizer.
class EmbeddingLearner final : public IncrementalLearner {
 public:
  EmbeddingLearner(MethodConfig method, ModelConfig model, TrainingConfig training)
      : method_(method), model_(std::move(model)), training_(training),
        net_(model_.backbone, training.seed * 7919 + 1), rng_(training.seed * 104729 + 17) {}

  std::vector<double> pretrain(const TaskData& corpus) override {
    return train_metric(net_.parameters(), [this](const Tensor& x) { return net_.forward(x).pooled; }, corpus,
                        training_.pretrain_epochs, training_.pretrain_learning_rate, training_.batch_size,
                        method_.margin, model_.backbone.input_resolution, training_.augmentation, rng_);
  }

  TaskLog learn_task(std::size_t task, const TaskData& train) override {
    const auto start = std::chrono::steady_clock::now();
    TaskLog log;
    const std::size_t res = model_.backbone.input_resolution;
    Adam optimizer(net_.parameters(), {training_.learning_rate});
    for (std::size_t epoch = 0; epoch < training_.epochs; ++epoch) {
      double total = 0.0;
      std::size_t steps = 0;
      for (const auto& batch : shuffled_batches(train.size(), training_.batch_size, rng_)) {
        auto labels = labels_of(train, batch);
        auto triplets = sample_triplets(labels, rng_);
        if (triplets.anchor.empty()) continue;
        Tensor x = harness::preprocess_train(train, batch, res, training_.augmentation, rng_);
        Tensor pooled = net_.forward(x).pooled;
        Tensor loss = metric_loss(pooled, triplets, method_.margin);
        if (previous_ && method_.method != Method::FT && method_.method != Method::SDC) {
          loss = combined_loss(loss, regularizer(x, pooled), method_);
        }
        check_loss(loss.item(), task, epoch, "training loss");
        optimizer.zero_grad();
        loss.backward();
        optimizer.step();
        total += loss.item();
        ++steps;
      }
      log.epoch_losses.push_back(steps ? total / static_cast<double>(steps) : 0.0);
    }

    const auto features = embed_with(net_, train);
    if (method_.method == Method::SDC && previous_) {
      memory_ = sdc_drift_compensation(memory_, embed_with(*previous_, train), features, method_.sdc_bandwidth);
    }
    add_task_prototypes(memory_, features, train.labels, task);
    if (method_.method == Method::EWC) accumulate(fisher_on(train));
    if (method_.method == Method::MAS) accumulate(mas_on(train));
    previous_ = net_.clone();
    log.seconds = seconds_since(start);
    return log;
  }

  Eigen::MatrixXd embed(const TaskData& data) const override { return embed_with(net_, data); }
  const PrototypeMemory& memory() const override { return memory_; }
  NamedTensors parameters() const override { return net_.parameters(); }

 private:
  Tensor regularizer(const Tensor& x, const Tensor& pooled) const {
    switch (method_.method) {
      case Method::LWF: {
        Tensor previous_embedding;
        {
          NoGradGuard guard;
          previous_embedding = ops::l2_normalize_rows(previous_->forward(x).pooled);
        }
        return lwf_loss(ops::l2_normalize_rows(pooled), previous_embedding);
      }
      case Method::EWC: return ewc_loss(net_.parameters(), previous_->parameters(), *importance_);
      case Method::MAS: return mas_loss(net_.parameters(), previous_->parameters(), *importance_);
      default: return Tensor::scalar(0.0);
    }
  }

  Eigen::MatrixXd embed_with(const Backbone& net, const TaskData& data) const {
    return embed_all(data, model_.backbone.input_resolution, training_.eval_batch_size,
                     [&net](const Tensor& x) { return ops::l2_normalize_rows(net.forward(x).pooled); });
  }

  ImportanceMap fisher_on(const TaskData& train) {
    const std::size_t res = model_.backbone.input_resolution;
    auto triplets = sample_triplets(train.labels, rng_);
    if (triplets.anchor.empty()) throw InvalidInput("EWC Fisher estimation needs two classes with two samples each");
    return estimate_fisher(net_.parameters(), triplets.anchor.size(), [&](std::size_t i) {
      std::vector<std::size_t> idx{triplets.anchor[i], triplets.positive[i], triplets.negative[i]};
      Tensor pooled = net_.forward(harness::preprocess_eval(train, idx, res)).pooled;
      return metric_loss(pooled, TripletIndices{{0}, {1}, {2}}, method_.margin);
    });
  }

  ImportanceMap mas_on(const TaskData& train) {
    const std::size_t res = model_.backbone.input_resolution;
    // The normalized embedding has constant norm, so sensitivity is measured
    // on the pooled features feeding it.
    return mas_importance(net_.parameters(), train.size(), [&](std::size_t i) {
      std::vector<std::size_t> idx{i};
      return net_.forward(harness::preprocess_eval(train, idx, res)).pooled;
    });
  }

  void accumulate(ImportanceMap map) {
    if (importance_) {
      importance_->accumulate(map);
    } else {
      importance_ = std::move(map);
    }
  }

  MethodConfig method_;
  ModelConfig model_;
  TrainingConfig training_;
  Backbone net_;
  std::optional<Backbone> previous_;
  std::optional<ImportanceMap> importance_;
  PrototypeMemory memory_;
  Rng rng_;
};

// Spatial path + frequency path, each with SE/Fca attention aligned by a
// CADA-VAE, fused by concatenation after a third alignment.
class SfdNetwork {
 public:
  struct Output {
    Tensor fused;
    Tensor cada_loss;
  };

  SfdNetwork() = default;
  SfdNetwork(const ModelConfig& model, std::uint64_t seed)
      : cutoff_(model.cutoff()), feature_gradient_(model.alignment_feature_gradient) {
    Rng rng(seed);
    const auto& base = model.backbone;
    spatial_ = Backbone(base, rng());
    BackboneConfig freq_cfg = base;
    freq_cfg.input_channels = 3 * base.input_channels;
    frequency_ = Backbone(freq_cfg, rng());
    const std::size_t c = base.embedding_dim;
    const std::size_t fr = base.final_resolution();
    auto indices = model.fca_frequency_groups <= 1 ? std::vector<attention::FrequencyIndex>{{0, 0}}
                                                   : attention::lowest_frequency_indices(model.fca_frequency_groups, fr, fr);
    spatial_attention_ = attention::AttentionPair::make(c, model.attention_reduction, indices, rng);
    frequency_attention_ = attention::AttentionPair::make(c, model.attention_reduction, indices, rng);
    const std::size_t instances = model.share_alignment ? 1 : 3;
    for (std::size_t i = 0; i < instances; ++i) alignments_.emplace_back(std::vector<std::size_t>{c, c}, model.cada, rng);
  }

  std::size_t embedding_dim() const { return 2 * spatial_.config().embedding_dim; }
  std::size_t cutoff() const { return cutoff_; }

  /// noise_rng == nullptr skips the alignment losses (evaluation).
  Output forward(const Tensor& images, Rng* noise_rng) const {
    Tensor triplets = harness::frequency_triplets(images, cutoff_);
    auto spatial_map = spatial_.forward(images).feature_map;
    auto frequency_map = frequency_.forward(triplets).feature_map;
    auto s = spatial_attention_.forward(spatial_map);
    auto f = frequency_attention_.forward(frequency_map);
    auto spatial = ops::scale(ops::add(s.se_features, s.fca_features), 0.5);
    auto frequency = ops::scale(ops::add(f.se_features, f.fca_features), 0.5);
    // Unit length like the baseline embeddings, so NCM distances ignore feature scale.
    auto fused = ops::l2_normalize_rows(cada::fuse({spatial, Provenance::spatial}, {frequency, Provenance::frequency}).values);
    if (!noise_rng) return {fused, {}};
    const Tensor afa_s[] = {feed(s.se_features), feed(s.fca_features)};
    const Tensor afa_f[] = {feed(f.se_features), feed(f.fca_features)};
    const Tensor fusion[] = {feed(spatial), feed(frequency)};
    auto loss = alignment(0).losses(afa_s, *noise_rng).total;
    loss = ops::add(loss, alignment(1).losses(afa_f, *noise_rng).total);
    loss = ops::add(loss, alignment(2).losses(fusion, *noise_rng).total);
    return {fused, loss};
  }

  // Alignment input whose backward pass reaches the backbone scaled by feature_gradient_.
  Tensor feed(const Tensor& x) const {
    const Tensor fixed = x.detach();
    if (feature_gradient_ == 0.0) return fixed;
    if (feature_gradient_ == 1.0) return x;
    return ops::add(fixed, ops::scale(ops::sub(x, fixed), feature_gradient_));
  }

  NamedTensors parameters() const {
    NamedTensors out;
    append_prefixed(out, "spatial", spatial_.parameters());
    append_prefixed(out, "frequency", frequency_.parameters());
    append_prefixed(out, "spatial_attention", spatial_attention_.parameters());
    append_prefixed(out, "frequency_attention", frequency_attention_.parameters());
    for (std::size_t i = 0; i < alignments_.size(); ++i) append_prefixed(out, "alignment" + std::to_string(i), alignments_[i].parameters());
    return out;
  }

  SfdNetwork clone() const {
    SfdNetwork n;
    n.cutoff_ = cutoff_;
    n.feature_gradient_ = feature_gradient_;
    n.spatial_ = spatial_.clone();
    n.frequency_ = frequency_.clone();
    n.spatial_attention_ = spatial_attention_.clone();
    n.frequency_attention_ = frequency_attention_.clone();
    for (const auto& a : alignments_) n.alignments_.push_back(a.clone());
    return n;
  }

 private:
  const cada::CadaVae& alignment(std::size_t i) const { return alignments_[alignments_.size() == 1 ? 0 : i]; }

  std::size_t cutoff_ = 0;
  double feature_gradient_ = 0.0;
  Backbone spatial_;
  Backbone frequency_;
  attention::AttentionPair spatial_attention_;
  attention::AttentionPair frequency_attention_;
  std::vector<cada::CadaVae> alignments_;
};

// A frozen feature extractor together with the translator that maps its
// fused features into the space the prototype memory lives in.
struct SfdSnapshot {
  SfdNetwork network;
  std::optional<Translator> projection;

  Tensor embed(const Tensor& images) const {
    Tensor z = network.forward(images, nullptr).fused;
    return projection ? translation::translate(z, *projection) : z;
  }
};

class SfdLearner final : public IncrementalLearner {
 public:
  SfdLearner(MethodConfig method, ModelConfig model, TrainingConfig training)
      : method_(method), model_(std::move(model)), training_(training),
        net_(model_, training.seed * 7919 + 3), rng_(training.seed * 104729 + 29) {}

  std::vector<double> pretrain(const TaskData& corpus) override {
    return train_metric(net_.parameters(), [this](const Tensor& x) { return net_.forward(x, nullptr).fused; }, corpus,
                        training_.pretrain_epochs, training_.pretrain_learning_rate, training_.batch_size,
                        method_.margin, model_.backbone.input_resolution, training_.augmentation, rng_);
  }

  TaskLog learn_task(std::size_t task, const TaskData& train) override {
    const auto start = std::chrono::steady_clock::now();
    TaskLog log;
    const std::size_t res = model_.backbone.input_resolution;
    const std::size_t dim = net_.embedding_dim();
    const bool transition = previous_.has_value();

    std::optional<Translator> t_old, t_current;
    NamedTensors params = net_.parameters();
    if (transition) {
      t_old = Translator::make(dim, TranslatorRole::old_model, rng_);
      t_current = Translator::make(dim, TranslatorRole::current_model, rng_);
      append_prefixed(params, "t_old", t_old->parameters());
      append_prefixed(params, "t_current", t_current->parameters());
    }

    Adam optimizer(params, {training_.learning_rate});
    for (std::size_t epoch = 0; epoch < training_.epochs; ++epoch) {
      double total = 0.0;
      std::size_t steps = 0;
      for (const auto& batch : shuffled_batches(train.size(), training_.batch_size, rng_)) {
        Tensor x = harness::preprocess_train(train, batch, res, training_.augmentation, rng_);
        auto out = net_.forward(x, &rng_);
        Tensor loss = out.cada_loss;
        if (transition) {
          Tensor z_old;
          {
            NoGradGuard guard;
            z_old = previous_->embed(x);
          }
          auto compensation = translation::compensation_loss(
              {translation::translate(z_old, *t_old), translation::translate(out.fused, *t_current)});
          loss = total_loss(loss, compensation);
        }
        if (method_.method == Method::E_SFDNet) {
          auto triplets = sample_triplets(labels_of(train, batch), rng_);
          if (!triplets.anchor.empty()) loss = ops::add(loss, metric_loss(out.fused, triplets, method_.margin));
        }
        check_loss(loss.item(), task, epoch, "training loss");
        optimizer.zero_grad();
        loss.backward();
        optimizer.step();
        total += loss.item();
        ++steps;
      }
      log.epoch_losses.push_back(steps ? total / static_cast<double>(steps) : 0.0);
    }

    Eigen::MatrixXd features = embed_all(train, res, training_.eval_batch_size,
                                         [this](const Tensor& x) { return net_.forward(x, nullptr).fused; });
    add_task_prototypes(memory_, features, train.labels, task);

    if (transition) {
      Eigen::MatrixXd old_features = embed_all(train, res, training_.eval_batch_size,
                                               [this](const Tensor& x) { return previous_->embed(x); });
      log.translator_losses = train_translators(*t_old, *t_current, old_features, features, task);
      memory_ = translation::update_prototype_memory(memory_, *t_old, *t_current, static_cast<int>(task));
    }
    previous_ = SfdSnapshot{net_.clone(), transition ? std::optional<Translator>(t_current->clone()) : std::nullopt};
    log.seconds = seconds_since(start);
    return log;
  }

  Eigen::MatrixXd embed(const TaskData& data) const override {
    // After learn_task the snapshot holds exactly the current network and its projection.
    if (!previous_) {
      return embed_all(data, model_.backbone.input_resolution, training_.eval_batch_size,
                       [this](const Tensor& x) { return net_.forward(x, nullptr).fused; });
    }
    return embed_all(data, model_.backbone.input_resolution, training_.eval_batch_size,
                     [this](const Tensor& x) { return previous_->embed(x); });
  }

  const PrototypeMemory& memory() const override { return memory_; }
  NamedTensors parameters() const override {
    auto out = net_.parameters();
    if (previous_ && previous_->projection) append_prefixed(out, "projection", previous_->projection->parameters());
    return out;
  }

 private:
  // Both feature extractors are frozen; only the translators move.
  std::vector<double> train_translators(Translator& t_old, Translator& t_current, const Eigen::MatrixXd& old_features,
                                        const Eigen::MatrixXd& new_features, std::size_t task) {
    NamedTensors params;
    append_prefixed(params, "t_old", t_old.parameters());
    append_prefixed(params, "t_current", t_current.parameters());
    Adam optimizer(params, {training_.translator_learning_rate});
    const Tensor z_old = to_tensor(old_features);
    const Tensor z_new = to_tensor(new_features);
    std::vector<double> losses;
    for (std::size_t epoch = 0; epoch < training_.translator_epochs; ++epoch) {
      double total = 0.0;
      std::size_t steps = 0;
      for (const auto& batch : shuffled_batches(static_cast<std::size_t>(old_features.rows()), training_.batch_size, rng_)) {
        auto loss = translation::compensation_loss({translation::translate(ops::gather_rows(z_old, batch), t_old),
                                                    translation::translate(ops::gather_rows(z_new, batch), t_current)});
        check_loss(loss.item(), task, epoch, "compensation loss");
        optimizer.zero_grad();
        loss.backward();
        optimizer.step();
        total += loss.item();
        ++steps;
      }
      losses.push_back(steps ? total / static_cast<double>(steps) : 0.0);
    }
    return losses;
  }

  MethodConfig method_;
  ModelConfig model_;
  TrainingConfig training_;
  SfdNetwork net_;
  std::optional<SfdSnapshot> previous_;
  PrototypeMemory memory_;
  Rng rng_;
};

}  // namespace

std::size_t ModelConfig::cutoff() const noexcept {
  return frequency_cutoff.value_or(backbone.input_resolution / 4);
}

void ModelConfig::validate() const {
  backbone.validate();
  cada.validate();
  if (attention_reduction == 0 || backbone.embedding_dim % attention_reduction != 0) {
    throw ConfigError("attention reduction must divide the embedding width");
  }
  if (fca_frequency_groups == 0 || backbone.embedding_dim % fca_frequency_groups != 0) {
    throw ConfigError("Fca frequency groups must divide the embedding width");
  }
  const std::size_t fr = backbone.final_resolution();
  if (fca_frequency_groups > fr * fr) throw ConfigError("more Fca frequency groups than final map coefficients");
  if (cutoff() > 2 * (backbone.input_resolution - 1)) throw ConfigError("frequency cutoff out of range");
  if (!(alignment_feature_gradient >= 0.0 && alignment_feature_gradient <= 1.0)) {
    throw ConfigError("alignment_feature_gradient must lie in [0, 1]");
  }
}

void TrainingConfig::validate() const {
  if (batch_size < 2) throw ConfigError("batch_size must be at least 2");
  if (eval_batch_size == 0) throw ConfigError("eval_batch_size must be positive");
  if (!(learning_rate > 0.0) || !(translator_learning_rate > 0.0)) throw ConfigError("learning rates must be positive");
}

std::unique_ptr<IncrementalLearner> make_learner(const MethodConfig& method, const ModelConfig& model,
                                                 const TrainingConfig& training) {
  method.validate();
  model.validate();
  training.validate();
  if (uses_sfdnet(method.method)) return std::make_unique<SfdLearner>(method, model, training);
  return std::make_unique<EmbeddingLearner>(method, model, training);
}

double ncm_accuracy(const IncrementalLearner& learner, const harness::TaskData& data) {
  if (data.size() == 0) throw InvalidInput("ncm_accuracy: empty evaluation set");
  const auto predictions = translation::ncm_classify(learner.embed(data), learner.memory());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) correct += predictions[i] == data.labels[i];
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

IncrementalResult run_incremental(harness::TaskStream& stream, IncrementalLearner& learner) {
  IncrementalResult result{metrics::AccuracyMatrix(stream.task_count()), {}};
  for (std::size_t t = 0; t < stream.task_count(); ++t) {
    {
      const auto train = stream.train(t);
      result.tasks.push_back(learner.learn_task(t, train));
    }
    stream.complete_task(t);
    for (std::size_t j = 0; j <= t; ++j) result.accuracy.set(t + 1, j + 1, ncm_accuracy(learner, stream.test(j)));
  }
  return result;
}

IncrementalResult run_incremental(harness::TaskStream& stream, const MethodConfig& method, const ModelConfig& model,
                                  const TrainingConfig& training) {
  auto learner = make_learner(method, model, training);
  return run_incremental(stream, *learner);
}

}  // namespace sfd::continual
