#pragma once

// Experiment configuration. Stored as JSON; every key is optional and falls
// back to the defaults below (docs/config.md lists them all).

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sfd/continual.hpp"
#include "sfd/harness/data.hpp"
#include "sfd/harness/datasets.hpp"
#include "sfd/incremental.hpp"

namespace sfd::harness {

enum class DatasetKind { synthetic, cifar, image_dir };

std::string to_string(DatasetKind kind);

struct DatasetSpec {
  DatasetKind kind = DatasetKind::synthetic;
  std::string name = "synthetic";
  std::filesystem::path path;  // file-backed kinds only
  std::size_t resolution = 32;
  std::size_t channels = 3;    // image_dir conversion target
  SyntheticSpec synthetic;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  std::size_t task_count = 5;
  std::size_t classes_per_task = 2;
  double test_fraction = 0.2;
  std::vector<continual::Method> methods{continual::Method::FT, continual::Method::SFDNet};
  std::vector<std::uint64_t> seeds{0};
  continual::TrainingConfig training = default_training();
  /// Warm-start corpus; its classes are unrelated to the benchmark classes.
  /// Epochs and step size live in `training`.
  DatasetSpec pretrain_corpus = default_corpus();
  continual::ModelConfig model;
  double lwf_gamma = 1.0;
  double ewc_gamma = 100.0;
  double mas_gamma = 1.0;
  double margin = 0.5;
  double sdc_bandwidth = 0.3;
  std::filesystem::path output_dir = "runs/latest";

  static continual::TrainingConfig default_training();
  static DatasetSpec default_corpus();

  /// Method options for one entry of `methods`.
  continual::MethodConfig method_config(continual::Method m) const;
  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

/// Parses JSON text. Unknown keys are rejected so typos surface as errors.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& file);
/// Full JSON form including defaults; parse_config(to_json(c)) == c.
std::string to_json(const ExperimentConfig& config);

Dataset load_dataset(const DatasetSpec& spec);

}  // namespace sfd::harness
