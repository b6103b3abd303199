#include "sfd/harness/data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "sfd/error.hpp"

namespace sfd::harness {

const char* to_string(Split s) noexcept { return s == Split::train ? "train" : "test"; }

std::span<const double> Dataset::image(std::size_t i) const {
  if (i >= size()) throw InvalidInput("image index out of range");
  return std::span<const double>(pixels).subspan(i * image_size(), image_size());
}

std::vector<int> Dataset::classes() const {
  std::set<int> s(labels.begin(), labels.end());
  return {s.begin(), s.end()};
}

void Dataset::append(std::span<const double> image, int label) {
  if (image.size() != image_size()) throw InvalidInput("appended image has the wrong size");
  pixels.insert(pixels.end(), image.begin(), image.end());
  labels.push_back(label);
}

std::span<const double> TaskData::image(std::size_t i) const {
  if (i >= size()) throw InvalidInput("image index out of range");
  return std::span<const double>(pixels).subspan(i * image_size(), image_size());
}

TaskStream::TaskStream(std::shared_ptr<const Dataset> dataset, std::vector<TaskSplit> tasks)
    : dataset_(std::move(dataset)), tasks_(std::move(tasks)), completed_(tasks_.size(), false) {
  if (!dataset_) throw InvalidInput("task stream needs a dataset");
  std::set<int> seen;
  for (const auto& t : tasks_) {
    for (int c : t.classes) {
      if (!seen.insert(c).second) throw InvalidInput("class " + std::to_string(c) + " appears in two tasks");
    }
    std::set<int> own(t.classes.begin(), t.classes.end());
    for (auto idx : t.train)
      if (idx >= dataset_->size() || !own.count(dataset_->labels[idx])) throw InvalidInput("train index outside its task");
    for (auto idx : t.test)
      if (idx >= dataset_->size() || !own.count(dataset_->labels[idx])) throw InvalidInput("test index outside its task");
  }
}

const TaskSplit& TaskStream::task(std::size_t t) const {
  if (t >= tasks_.size()) throw InvalidInput("task " + std::to_string(t) + " out of range");
  return tasks_[t];
}

TaskData TaskStream::materialize(std::size_t t, Split split) const {
  const auto& spec = task(t);
  {
    std::lock_guard lock(*mutex_);
    log_.push_back({log_.size(), t, split, completed_[t]});
  }
  const auto& indices = split == Split::train ? spec.train : spec.test;
  TaskData out{dataset_->channels, dataset_->height, dataset_->width, {}, {}};
  out.pixels.reserve(indices.size() * dataset_->image_size());
  for (auto idx : indices) {
    auto img = dataset_->image(idx);
    out.pixels.insert(out.pixels.end(), img.begin(), img.end());
    out.labels.push_back(dataset_->labels[idx]);
  }
  return out;
}

TaskData TaskStream::train(std::size_t t) const { return materialize(t, Split::train); }
TaskData TaskStream::test(std::size_t t) const { return materialize(t, Split::test); }

void TaskStream::complete_task(std::size_t t) {
  task(t);
  std::lock_guard lock(*mutex_);
  completed_[t] = true;
}

bool TaskStream::completed(std::size_t t) const {
  task(t);
  std::lock_guard lock(*mutex_);
  return completed_[t];
}

std::vector<AccessRecord> TaskStream::access_log() const {
  std::lock_guard lock(*mutex_);
  return log_;
}

std::vector<AccessRecord> TaskStream::violations() const {
  std::lock_guard lock(*mutex_);
  std::vector<AccessRecord> out;
  for (const auto& r : log_)
    if (r.split == Split::train && r.task_completed) out.push_back(r);
  return out;
}

TaskStream make_task_stream(std::shared_ptr<const Dataset> dataset, std::size_t task_count,
                            std::size_t classes_per_task, std::uint64_t seed, double test_fraction) {
  if (!dataset) throw InvalidInput("make_task_stream: no dataset");
  if (task_count == 0 || classes_per_task == 0) throw ConfigError("task_count and classes_per_task must be positive");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must lie in (0, 1)");
  auto classes = dataset->classes();
  if (task_count * classes_per_task > classes.size()) {
    throw ConfigError(std::to_string(task_count) + " tasks x " + std::to_string(classes_per_task) +
                      " classes exceeds the " + std::to_string(classes.size()) + " available classes");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(classes.begin(), classes.end(), rng);

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < dataset->size(); ++i) by_class[dataset->labels[i]].push_back(i);
  const bool canonical = dataset->canonical_split.size() == dataset->size();

  std::vector<TaskSplit> tasks(task_count);
  for (std::size_t t = 0; t < task_count; ++t) {
    auto& task = tasks[t];
    task.classes.assign(classes.begin() + static_cast<std::ptrdiff_t>(t * classes_per_task),
                        classes.begin() + static_cast<std::ptrdiff_t>((t + 1) * classes_per_task));
    for (int c : task.classes) {
      auto members = by_class[c];
      if (canonical) {
        for (auto idx : members) (dataset->canonical_split[idx] == Split::train ? task.train : task.test).push_back(idx);
        continue;
      }
      std::shuffle(members.begin(), members.end(), rng);
      std::size_t n_test = static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(members.size())));
      if (members.size() >= 2) n_test = std::clamp<std::size_t>(n_test, 1, members.size() - 1);
      task.test.insert(task.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
      task.train.insert(task.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
    }
    std::sort(task.train.begin(), task.train.end());
    std::sort(task.test.begin(), task.test.end());
  }
  return TaskStream(std::move(dataset), std::move(tasks));
}

}  // namespace sfd::harness
