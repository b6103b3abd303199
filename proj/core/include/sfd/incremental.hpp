#pragma once

// Class-incremental protocol driver. A learner sees one task's training
// split at a time, keeps only class prototypes and at most one frozen
// snapshot of its previous parameters, and is evaluated by NCM on the test
// splits of every task seen so far.

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "sfd/backbone.hpp"
#include "sfd/cada_vae.hpp"
#include "sfd/continual.hpp"
#include "sfd/harness/data.hpp"
#include "sfd/harness/preprocess.hpp"
#include "sfd/metrics.hpp"
#include "sfd/nn.hpp"
#include "sfd/translation.hpp"

namespace sfd::continual {

struct ModelConfig {
  /// Spatial path. The frequency path uses the same stages on 3x the input channels.
  BackboneConfig backbone;
  cada::CadaConfig cada;
  std::size_t attention_reduction = 4;
  /// 1 selects the DC index for every channel; more groups use the lowest k+l indices.
  std::size_t fca_frequency_groups = 1;
  /// One alignment VAE for the two AFA blocks and the fusion instead of three.
  bool share_alignment = false;
  /// k + l threshold of the low band; unset means resolution / 4.
  std::optional<std::size_t> frequency_cutoff;
  /// Fraction of the alignment-loss gradient that reaches the backbones and
  /// attention blocks. 0 trains the VAEs on fixed features.
  double alignment_feature_gradient = 0.0;

  std::size_t cutoff() const noexcept;
  void validate() const;
};

struct TrainingConfig {
  std::size_t epochs = 15;
  std::size_t batch_size = 32;
  double learning_rate = 1e-4;
  std::size_t translator_epochs = 20;
  double translator_learning_rate = 1e-3;
  harness::Augmentation augmentation;
  std::size_t eval_batch_size = 64;
  /// Metric-learning warm start on an auxiliary corpus before the first task.
  std::size_t pretrain_epochs = 0;
  double pretrain_learning_rate = 1e-3;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TaskLog {
  std::vector<double> epoch_losses;       // mean training loss per epoch
  std::vector<double> translator_losses;  // mean compensation loss per translator epoch
  double seconds = 0.0;
};

struct IncrementalResult {
  metrics::AccuracyMatrix accuracy;
  std::vector<TaskLog> tasks;
};

class IncrementalLearner {
 public:
  virtual ~IncrementalLearner() = default;

  /// Triplet-loss warm start of every feature extractor on classes outside
  /// the task stream; returns the mean loss per epoch.
  virtual std::vector<double> pretrain(const harness::TaskData& corpus) = 0;
  /// Trains on task `task` (0-based) and refreshes the prototype memory.
  virtual TaskLog learn_task(std::size_t task, const harness::TaskData& train) = 0;
  /// Embeddings in the space of the prototype memory, one row per image.
  virtual Eigen::MatrixXd embed(const harness::TaskData& data) const = 0;
  virtual const translation::PrototypeMemory& memory() const = 0;
  virtual NamedTensors parameters() const = 0;
};

std::unique_ptr<IncrementalLearner> make_learner(const MethodConfig& method, const ModelConfig& model,
                                                 const TrainingConfig& training);

/// Fraction of `data` whose NCM prediction matches its label.
double ncm_accuracy(const IncrementalLearner& learner, const harness::TaskData& data);

IncrementalResult run_incremental(harness::TaskStream& stream, IncrementalLearner& learner);
IncrementalResult run_incremental(harness::TaskStream& stream, const MethodConfig& method, const ModelConfig& model,
                                  const TrainingConfig& training);

}  // namespace sfd::continual
