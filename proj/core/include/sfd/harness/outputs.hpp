#pragma once

// Result files: accuracy matrix and metric tables as CSV, the config as JSON,
// loss curves as CSV and A_k / F_k line plots as SVG.

#include <filesystem>
#include <string>
#include <vector>

#include "sfd/harness/experiment.hpp"
#include "sfd/metrics.hpp"

namespace sfd::harness {

/// Header "after_task,1,..,K"; row k holds a[k][1..k] printed with %.17g,
/// upper-triangle cells are empty.
std::string matrix_csv(const metrics::AccuracyMatrix& matrix);
metrics::AccuracyMatrix parse_matrix_csv(const std::string& text);
metrics::AccuracyMatrix read_matrix_csv(const std::filesystem::path& file);

/// Columns k, A_k, F_k (F_1 empty).
std::string metrics_csv(const metrics::AccuracyMatrix& matrix);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal standalone SVG line chart.
std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series);

void write_text(const std::filesystem::path& file, const std::string& text);

/// Writes accuracy_matrix.csv, metrics.csv, losses.csv, config.json, audit.txt,
/// avg_accuracy.svg and avg_forgetting.svg (plus checkpoint.bin when
/// `with_checkpoint`) into `directory`.
void emit_outputs(const RunRecord& record, const ExperimentConfig& config, const std::filesystem::path& directory,
                  bool with_checkpoint = true);

/// Per-run folders <method>/seed<k>/ plus summary.csv, config.json and
/// seed-averaged comparison plots at the top level.
void emit_experiment(const ExperimentResult& result, const std::filesystem::path& directory);

/// A_k and F_k series of one matrix.
Series accuracy_series(const std::string& label, const metrics::AccuracyMatrix& matrix);
Series forgetting_series(const std::string& label, const metrics::AccuracyMatrix& matrix);

}  // namespace sfd::harness
