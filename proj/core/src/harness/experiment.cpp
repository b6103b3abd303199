#include "sfd/harness/experiment.hpp"

#include <algorithm>
#include <chrono>

#include "sfd/error.hpp"

namespace sfd::harness {

bool ExperimentResult::ok() const noexcept {
  return std::all_of(runs.begin(), runs.end(), [](const RunRecord& r) { return r.ok(); });
}

TaskData as_task_data(const Dataset& dataset) {
  return {dataset.channels, dataset.height, dataset.width, dataset.pixels, dataset.labels};
}

RunRecord run_method(const ExperimentConfig& config, continual::Method method, std::uint64_t seed,
                     std::shared_ptr<const Dataset> dataset, const TaskData* pretrain_corpus) {
  using clock = std::chrono::steady_clock;
  RunRecord record;
  record.method = method;
  record.seed = seed;
  const auto start = clock::now();
  try {
    auto stream = make_task_stream(std::move(dataset), config.task_count, config.classes_per_task, seed,
                                   config.test_fraction);
    auto training = config.training;
    training.seed = seed;
    auto learner = continual::make_learner(config.method_config(method), config.model, training);
    if (training.pretrain_epochs > 0) {
      if (!pretrain_corpus) throw ConfigError("pretraining requested without a corpus");
      record.pretrain_losses = learner->pretrain(*pretrain_corpus);
      record.pretrain_seconds = std::chrono::duration<double>(clock::now() - start).count();
    }
    auto result = continual::run_incremental(stream, *learner);
    record.avg_accuracy = metrics::accuracy_series(result.accuracy);
    record.avg_forgetting = metrics::forgetting_series(result.accuracy);
    record.accuracy = std::move(result.accuracy);
    record.tasks = std::move(result.tasks);
    record.audit_violations = stream.violations().size();
    record.parameters = learner->parameters();
    record.memory = learner->memory();
  } catch (const Error& e) {
    record.error = e.what();
  } catch (const std::bad_alloc&) {
    record.error = "out of memory";
  }
  record.total_seconds = std::chrono::duration<double>(clock::now() - start).count();
  return record;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const Progress& progress) {
  config.validate();
  ExperimentResult out{config, {}};
  auto dataset = std::make_shared<const Dataset>(load_dataset(config.dataset));
  std::optional<TaskData> corpus;
  if (config.training.pretrain_epochs > 0) corpus = as_task_data(load_dataset(config.pretrain_corpus));

  const std::size_t total = config.methods.size() * config.seeds.size();
  for (auto seed : config.seeds) {
    for (auto method : config.methods) {
      if (progress) {
        RunRecord pending;
        pending.method = method;
        pending.seed = seed;
        progress(pending, out.runs.size(), total, false);
      }
      out.runs.push_back(run_method(config, method, seed, dataset, corpus ? &*corpus : nullptr));
      if (progress) progress(out.runs.back(), out.runs.size(), total, true);
    }
  }
  return out;
}

}  // namespace sfd::harness
