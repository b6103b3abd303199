#pragma once

// Zero-shot translation between the previous and current embedding spaces,
// the class-prototype memory, and nearest-class-mean classification.

#include <Eigen/Core>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "sfd/nn.hpp"
#include "sfd/tensor.hpp"

namespace sfd::translation {

enum class TranslatorRole { old_model, current_model };

/// Residual map z -> z + W2 relu(W1 z + b1) + b2. The output layer starts at
/// zero so an untrained translator is the identity.
struct Translator {
  TranslatorRole role = TranslatorRole::current_model;
  Linear hidden;
  Linear output;

  static Translator make(std::size_t dim, TranslatorRole role, Rng& rng);
  static Translator zeros(std::size_t dim, TranslatorRole role);

  std::size_t dim() const { return hidden.in_features(); }
  /// The correction network alone, without the residual.
  Tensor network(const Tensor& z) const;

  NamedTensors parameters() const;
  Translator clone() const;
};

/// z + t(z). Throws InvalidInput on width mismatch.
Tensor translate(const Tensor& z, const Translator& t);
Eigen::VectorXd translate(const Eigen::VectorXd& z, const Translator& t);

struct CompensationBatch {
  Tensor m_old;      // [t, D] compensated previous-model features
  Tensor m_current;  // [t, D] compensated current-model features
};

/// (1/t) sum_i ||m_old_i - m_current_i||_1
Tensor compensation_loss(const CompensationBatch& batch);

struct PrototypeEntry {
  Eigen::VectorXd prototype;
  int task = 0;
};

/// class id -> (class embedding mean, task of origin). Ordered by class id.
class PrototypeMemory {
 public:
  void set(int class_id, Eigen::VectorXd prototype, int task);
  bool contains(int class_id) const { return entries_.count(class_id) != 0; }
  const PrototypeEntry& at(int class_id) const;
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  /// Common prototype width; 0 when empty.
  std::size_t dim() const noexcept;
  const std::map<int, PrototypeEntry>& entries() const noexcept { return entries_; }

 private:
  std::map<int, PrototypeEntry> entries_;
};

/// Mean feature per class. Rows of `features` align with `labels`.
std::map<int, Eigen::VectorXd> compute_prototypes(const Eigen::MatrixXd& features, std::span<const int> labels);

/// Entries from tasks before `current_task` go through t_old, entries of
/// `current_task` through t_current. Later tasks are left untouched.
PrototypeMemory update_prototype_memory(const PrototypeMemory& memory, const Translator& t_old,
                                        const Translator& t_current, int current_task);

/// Nearest prototype in Euclidean distance; ties resolve to the smallest class id.
int ncm_classify(const Eigen::VectorXd& query, const PrototypeMemory& memory);
std::vector<int> ncm_classify(const Eigen::MatrixXd& queries, const PrototypeMemory& memory);

}  // namespace sfd::translation
