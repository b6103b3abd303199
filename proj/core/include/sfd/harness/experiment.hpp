#pragma once

// Runs every (method, seed) pair of an experiment on shared task splits.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sfd/harness/config.hpp"
#include "sfd/incremental.hpp"
#include "sfd/metrics.hpp"

namespace sfd::harness {

struct RunRecord {
  continual::Method method = continual::Method::FT;
  std::uint64_t seed = 0;
  std::optional<metrics::AccuracyMatrix> accuracy;  // empty when the run failed
  std::vector<double> avg_accuracy;                 // A_1..A_K
  std::vector<double> avg_forgetting;               // F_2..F_K
  std::vector<double> pretrain_losses;
  std::vector<continual::TaskLog> tasks;
  double pretrain_seconds = 0.0;
  double total_seconds = 0.0;
  std::size_t audit_violations = 0;  // old-task train reads after completion
  std::string error;                 // non-empty when the run failed
  NamedTensors parameters;
  translation::PrototypeMemory memory;

  bool ok() const noexcept { return error.empty(); }
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunRecord> runs;

  bool ok() const noexcept;
};

/// Called before each run starts and after it ends; `done` is the number of finished runs.
using Progress = std::function<void(const RunRecord& record, std::size_t done, std::size_t total, bool finished)>;

/// A failing method run is recorded with its error; the remaining runs continue.
ExperimentResult run_experiment(const ExperimentConfig& config, const Progress& progress = {});

/// One run on a prepared dataset; never throws for module errors (they land in `error`).
RunRecord run_method(const ExperimentConfig& config, continual::Method method, std::uint64_t seed,
                     std::shared_ptr<const Dataset> dataset, const TaskData* pretrain_corpus);

/// Materializes a whole dataset as one TaskData.
TaskData as_task_data(const Dataset& dataset);

}  // namespace sfd::harness
