// sfdkit: batch front end for class-incremental experiments.
//
//   sfdkit run config.json            train and evaluate every (method, seed)
//   sfdkit metrics accuracy_matrix.csv
//   sfdkit plot a.csv b.csv ...       A_k / F_k plots for saved matrices
//   sfdkit synth                      write the synthetic dataset as images
//   sfdkit defaults                   print the default config
//
// Exit codes: 0 success, 1 config error, 2 runtime failure.

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sfd/error.hpp"
#include "sfd/harness/config.hpp"
#include "sfd/harness/datasets.hpp"
#include "sfd/harness/experiment.hpp"
#include "sfd/harness/outputs.hpp"

namespace fs = std::filesystem;
using namespace sfd;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> out;
  std::string log_level = "info";
};

// --out beats SFD_OUTPUT_DIR, which beats the fallback.
fs::path output_directory(const GlobalOptions& g, const fs::path& fallback) {
  if (g.out) return *g.out;
  if (const char* env = std::getenv("SFD_OUTPUT_DIR"); env && *env) return env;
  return fallback;
}

int cmd_run(const GlobalOptions& g, const fs::path& config_file, const std::vector<std::string>& methods) {
  auto config = harness::load_config(config_file);
  if (g.seed) config.seeds = {*g.seed};
  if (!methods.empty()) {
    config.methods.clear();
    for (const auto& name : methods) {
      auto m = continual::parse_method(name);
      if (!m) throw ConfigError("unknown method '" + name + "'");
      config.methods.push_back(*m);
    }
  }
  config.output_dir = output_directory(g, config.output_dir);
  config.validate();
  spdlog::info("dataset {} | {} tasks x {} classes | output {}", config.dataset.name, config.task_count,
               config.classes_per_task, config.output_dir.string());

  auto progress = [](const harness::RunRecord& r, std::size_t done, std::size_t total, bool finished) {
    const auto name = continual::to_string(r.method);
    if (!finished) {
      spdlog::info("[{}/{}] {} seed {} started", done + 1, total, name, r.seed);
    } else if (r.ok()) {
      spdlog::info("[{}/{}] {} seed {}: A_K={:.4f} F_K={:.4f} ({:.1f}s, {} audit violations)", done, total, name,
                   r.seed, r.avg_accuracy.back(), r.avg_forgetting.empty() ? 0.0 : r.avg_forgetting.back(),
                   r.total_seconds, r.audit_violations);
    } else {
      spdlog::error("[{}/{}] {} seed {} failed: {}", done, total, name, r.seed, r.error);
    }
  };
  const auto result = harness::run_experiment(config, progress);
  harness::emit_experiment(result, config.output_dir);
  spdlog::info("wrote {}", (config.output_dir / "summary.csv").string());
  return result.ok() ? kOk : kRuntimeError;
}

int cmd_metrics(const GlobalOptions& g, const fs::path& matrix_file) {
  const auto matrix = harness::read_matrix_csv(matrix_file);
  const auto table = harness::metrics_csv(matrix);
  if (g.out) {
    fs::create_directories(*g.out);
    harness::write_text(*g.out / "metrics.csv", table);
    spdlog::info("wrote {}", (*g.out / "metrics.csv").string());
  } else {
    std::cout << table;
  }
  return kOk;
}

// Label of a matrix file: its run folder when laid out as <method>/seed<k>/.
std::string series_label(const fs::path& file) {
  const auto dir = file.parent_path();
  if (dir.empty()) return file.stem().string();
  if (dir.filename().string().rfind("seed", 0) == 0 && dir.has_parent_path()) {
    return dir.parent_path().filename().string() + " " + dir.filename().string();
  }
  return dir.filename().string();
}

int cmd_plot(const GlobalOptions& g, const std::vector<fs::path>& matrix_files) {
  std::vector<harness::Series> acc, forget;
  for (const auto& file : matrix_files) {
    const auto matrix = harness::read_matrix_csv(file);
    acc.push_back(harness::accuracy_series(series_label(file), matrix));
    forget.push_back(harness::forgetting_series(series_label(file), matrix));
  }
  const auto dir = output_directory(g, matrix_files.front().parent_path());
  fs::create_directories(dir);
  harness::write_text(dir / "avg_accuracy.svg",
                      harness::line_plot_svg("Average incremental accuracy", "task k", "A_k", acc));
  harness::write_text(dir / "avg_forgetting.svg",
                      harness::line_plot_svg("Average forgetting", "task k", "F_k", forget));
  spdlog::info("wrote plots to {}", dir.string());
  return kOk;
}

int cmd_synth(const GlobalOptions& g, harness::SyntheticSpec spec) {
  if (g.seed) spec.seed = *g.seed;
  const auto dir = output_directory(g, "synthetic");
  const auto dataset = harness::make_synthetic(spec);
  harness::write_image_directory(dataset, dir);
  spdlog::info("wrote {} images in {} classes to {}", dataset.size(), spec.classes, dir.string());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial-frequency class-incremental learning toolkit"};
  app.require_subcommand(1);
  // Global flags may also follow the subcommand.
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--seed", g.seed, "Override the seed (run: the seed list; synth: the generator seed)");
  app.add_option("--out", g.out, "Output directory; overrides SFD_OUTPUT_DIR and the config");
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  fs::path config_file;
  std::vector<std::string> methods;
  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  run->add_option("config", config_file, "Config file")->required();
  run->add_option("--methods", methods, "Replace the config's method list (FT, LWF, EWC, MAS, SDC, SFDNet, E_SFDNet)");

  fs::path matrix_file;
  auto* metrics = app.add_subcommand("metrics", "Print A_k and F_k for a saved accuracy matrix");
  metrics->add_option("matrix", matrix_file, "accuracy_matrix.csv")->required()->check(CLI::ExistingFile);

  std::vector<fs::path> plot_files;
  auto* plot = app.add_subcommand("plot", "Regenerate A_k / F_k plots from saved matrices");
  plot->add_option("matrices", plot_files, "accuracy_matrix.csv files, one series each")
      ->required()
      ->check(CLI::ExistingFile);

  harness::SyntheticSpec spec;
  auto* synth = app.add_subcommand("synth", "Write the synthetic dataset as a class-folder image tree");
  synth->add_option("--classes", spec.classes, "Number of classes")->capture_default_str();
  synth->add_option("--per-class", spec.per_class, "Images per class")->capture_default_str();
  synth->add_option("--size", spec.size, "Image side length")->capture_default_str();
  synth->add_option("--channels", spec.channels, "1 or 3")->capture_default_str();
  synth->add_option("--noise", spec.noise, "Pixel noise standard deviation")->capture_default_str();

  auto* defaults = app.add_subcommand("defaults", "Print the default config as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  spdlog::set_level(spdlog::level::from_str(g.log_level));

  try {
    if (*run) return cmd_run(g, config_file, methods);
    if (*metrics) return cmd_metrics(g, matrix_file);
    if (*plot) return cmd_plot(g, plot_files);
    if (*synth) return cmd_synth(g, spec);
    if (*defaults) {
      std::cout << harness::to_json(harness::ExperimentConfig{}) << '\n';
      return kOk;
    }
  } catch (const ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    return kConfigError;
  } catch (const IoError& e) {
    spdlog::error("{}", e.what());
    return *run && !fs::exists(config_file) ? kConfigError : kRuntimeError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kRuntimeError;
  }
  return kOk;
}
