#include "sfd/translation.hpp"

#include <limits>
#include <string>

#include "sfd/error.hpp"
#include "sfd/ops.hpp"

namespace sfd::translation {

Translator Translator::make(std::size_t dim, TranslatorRole role, Rng& rng) {
  return {role, Linear::make(dim, dim, rng), Linear::zeros(dim, dim)};
}

Translator Translator::zeros(std::size_t dim, TranslatorRole role) {
  return {role, Linear::zeros(dim, dim), Linear::zeros(dim, dim)};
}

Tensor Translator::network(const Tensor& z) const { return output.forward(ops::relu(hidden.forward(z))); }

NamedTensors Translator::parameters() const {
  NamedTensors out;
  append_prefixed(out, "hidden", hidden.parameters());
  append_prefixed(out, "output", output.parameters());
  return out;
}

Translator Translator::clone() const { return {role, hidden.clone(), output.clone()}; }

Tensor translate(const Tensor& z, const Translator& t) {
  if (z.rank() != 2 || z.dim(1) != t.dim()) {
    throw InvalidInput("translate: translator width " + std::to_string(t.dim()) + " does not match " +
                       shape_string(z.shape()));
  }
  return ops::add(z, t.network(z));
}

Eigen::VectorXd translate(const Eigen::VectorXd& z, const Translator& t) {
  NoGradGuard guard;
  auto row = Tensor::from({1, static_cast<std::size_t>(z.size())}, std::vector<double>(z.data(), z.data() + z.size()));
  const Tensor out = translate(row, t);
  return Eigen::Map<const Eigen::VectorXd>(out.data().data(), z.size());
}

Tensor compensation_loss(const CompensationBatch& batch) {
  if (!batch.m_old.defined() || !batch.m_current.defined() || batch.m_old.rank() != 2 || batch.m_old.dim(0) == 0) {
    throw InvalidInput("compensation_loss: empty batch");
  }
  if (batch.m_old.shape() != batch.m_current.shape()) {
    throw InvalidInput("compensation_loss: batch shapes differ " + shape_string(batch.m_old.shape()) + " vs " +
                       shape_string(batch.m_current.shape()));
  }
  return ops::mean(ops::sum_rows(ops::abs(ops::sub(batch.m_old, batch.m_current))));
}

void PrototypeMemory::set(int class_id, Eigen::VectorXd prototype, int task) {
  if (!entries_.empty() && static_cast<std::size_t>(prototype.size()) != dim()) {
    throw InvalidInput("prototype width " + std::to_string(prototype.size()) + " differs from memory width " +
                       std::to_string(dim()));
  }
  entries_[class_id] = {std::move(prototype), task};
}

const PrototypeEntry& PrototypeMemory::at(int class_id) const {
  auto it = entries_.find(class_id);
  if (it == entries_.end()) throw InvalidInput("no prototype for class " + std::to_string(class_id));
  return it->second;
}

std::size_t PrototypeMemory::dim() const noexcept {
  return entries_.empty() ? 0 : static_cast<std::size_t>(entries_.begin()->second.prototype.size());
}

std::map<int, Eigen::VectorXd> compute_prototypes(const Eigen::MatrixXd& features, std::span<const int> labels) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw InvalidInput("compute_prototypes: one label per feature row is required");
  }
  if (labels.empty()) throw InvalidInput("compute_prototypes: no features");
  std::map<int, Eigen::VectorXd> sums;
  std::map<int, std::size_t> counts;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = sums.try_emplace(labels[i], Eigen::VectorXd::Zero(features.cols()));
    it->second += features.row(static_cast<Eigen::Index>(i)).transpose();
    ++counts[labels[i]];
  }
  for (auto& [c, s] : sums) s /= static_cast<double>(counts[c]);
  return sums;
}

PrototypeMemory update_prototype_memory(const PrototypeMemory& memory, const Translator& t_old,
                                        const Translator& t_current, int current_task) {
  PrototypeMemory out;
  for (const auto& [c, entry] : memory.entries()) {
    if (entry.task < current_task) {
      out.set(c, translate(entry.prototype, t_old), entry.task);
    } else if (entry.task == current_task) {
      out.set(c, translate(entry.prototype, t_current), entry.task);
    } else {
      out.set(c, entry.prototype, entry.task);
    }
  }
  return out;
}

int ncm_classify(const Eigen::VectorXd& query, const PrototypeMemory& memory) {
  if (memory.empty()) throw InvalidState("ncm_classify: prototype memory is empty");
  if (static_cast<std::size_t>(query.size()) != memory.dim()) {
    throw InvalidInput("ncm_classify: query width differs from prototype width");
  }
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  // std::map iterates in ascending class id, so strict < keeps the smallest id on ties.
  for (const auto& [c, entry] : memory.entries()) {
    const double d = (query - entry.prototype).squaredNorm();
    if (d < best_dist) {
      best_dist = d;
      best = c;
    }
  }
  return best;
}

std::vector<int> ncm_classify(const Eigen::MatrixXd& queries, const PrototypeMemory& memory) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(queries.rows()));
  for (Eigen::Index i = 0; i < queries.rows(); ++i) out.push_back(ncm_classify(Eigen::VectorXd(queries.row(i).transpose()), memory));
  return out;
}

}  // namespace sfd::translation
