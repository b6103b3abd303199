#pragma once

// Labeled image collections, class-incremental task splits and the access
// log that proves old training data is never touched again.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

namespace sfd::harness {

enum class Split { train, test };

const char* to_string(Split s) noexcept;

/// Images of identical size stored contiguously as [N, C, H, W] in [0, 1].
struct Dataset {
  std::string name;
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;
  std::vector<int> labels;
  /// Optional canonical split, one entry per image. Empty when the source has none.
  std::vector<Split> canonical_split;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t image_size() const noexcept { return channels * height * width; }
  std::span<const double> image(std::size_t i) const;
  /// Sorted distinct labels.
  std::vector<int> classes() const;
  void append(std::span<const double> image, int label);
};

/// A materialized copy of one task split.
struct TaskData {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;
  std::vector<int> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t image_size() const noexcept { return channels * height * width; }
  std::span<const double> image(std::size_t i) const;
};

struct TaskSplit {
  std::vector<int> classes;
  std::vector<std::size_t> train;  // dataset indices
  std::vector<std::size_t> test;
};

struct AccessRecord {
  std::size_t sequence = 0;
  std::size_t task = 0;  // 0-based
  Split split = Split::train;
  bool task_completed = false;  // the task had finished training when read
};

/// Ordered tasks over a shared read-only dataset. Every read is recorded.
class TaskStream {
 public:
  TaskStream(std::shared_ptr<const Dataset> dataset, std::vector<TaskSplit> tasks);

  std::size_t task_count() const noexcept { return tasks_.size(); }
  const TaskSplit& task(std::size_t t) const;
  const Dataset& dataset() const noexcept { return *dataset_; }

  TaskData train(std::size_t t) const;
  TaskData test(std::size_t t) const;

  /// Marks the end of training for task t; later train reads of t are violations.
  void complete_task(std::size_t t);
  bool completed(std::size_t t) const;

  std::vector<AccessRecord> access_log() const;
  /// Train reads of tasks whose training had already completed.
  std::vector<AccessRecord> violations() const;

 private:
  TaskData materialize(std::size_t t, Split split) const;

  std::shared_ptr<const Dataset> dataset_;
  std::vector<TaskSplit> tasks_;
  std::vector<bool> completed_;
  std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
  mutable std::vector<AccessRecord> log_;
};

/// Partitions classes into `task_count` disjoint ordered groups of
/// `classes_per_task` using `seed`. Per class, the canonical split is used when
/// the dataset has one, otherwise a seeded shuffle with `test_fraction` held out.
/// Throws ConfigError when the dataset has too few classes.
TaskStream make_task_stream(std::shared_ptr<const Dataset> dataset, std::size_t task_count,
                            std::size_t classes_per_task, std::uint64_t seed, double test_fraction = 0.2);

}  // namespace sfd::harness
