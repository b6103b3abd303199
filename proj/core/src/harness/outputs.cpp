#include "sfd/harness/outputs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "sfd/checkpoint.hpp"
#include "sfd/error.hpp"

namespace sfd::harness {

namespace fs = std::filesystem;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(double v, int precision) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string losses_csv(const RunRecord& record) {
  std::ostringstream out;
  out << "phase,task,epoch,loss\n";
  for (std::size_t e = 0; e < record.pretrain_losses.size(); ++e) {
    out << "pretrain,0," << e + 1 << ',' << fmt17(record.pretrain_losses[e]) << '\n';
  }
  for (std::size_t t = 0; t < record.tasks.size(); ++t) {
    const auto& log = record.tasks[t];
    for (std::size_t e = 0; e < log.epoch_losses.size(); ++e) {
      out << "train," << t + 1 << ',' << e + 1 << ',' << fmt17(log.epoch_losses[e]) << '\n';
    }
    for (std::size_t e = 0; e < log.translator_losses.size(); ++e) {
      out << "translator," << t + 1 << ',' << e + 1 << ',' << fmt17(log.translator_losses[e]) << '\n';
    }
  }
  return out.str();
}

std::string run_label(const RunRecord& r) { return continual::to_string(r.method); }

}  // namespace

std::string matrix_csv(const metrics::AccuracyMatrix& matrix) {
  const std::size_t k_max = matrix.task_count();
  std::ostringstream out;
  out << "after_task";
  for (std::size_t j = 1; j <= k_max; ++j) out << ',' << j;
  out << '\n';
  for (std::size_t k = 1; k <= k_max; ++k) {
    out << k;
    for (std::size_t j = 1; j <= k_max; ++j) {
      out << ',';
      if (j <= k) out << fmt17(matrix.at(k, j));
    }
    out << '\n';
  }
  return out.str();
}

metrics::AccuracyMatrix parse_matrix_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("matrix CSV is empty");
  const auto header = split_line(line);
  if (header.size() < 2 || header[0] != "after_task") throw InvalidInput("matrix CSV header must start with after_task");
  const std::size_t k_max = header.size() - 1;
  for (std::size_t j = 1; j <= k_max; ++j) {
    if (header[j] != std::to_string(j)) throw InvalidInput("matrix CSV header task ids must be 1..K");
  }
  metrics::AccuracyMatrix matrix(k_max);
  std::size_t k = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++k;
    const auto cells = split_line(line);
    if (k > k_max || cells.size() != k_max + 1 || cells[0] != std::to_string(k)) {
      throw InvalidInput("matrix CSV row " + std::to_string(k) + " is malformed");
    }
    for (std::size_t j = 1; j <= k_max; ++j) {
      if (j > k) {
        if (!cells[j].empty()) throw InvalidInput("matrix CSV has a value above the diagonal in row " + std::to_string(k));
        continue;
      }
      try {
        std::size_t used = 0;
        const double v = std::stod(cells[j], &used);
        if (used != cells[j].size()) throw std::invalid_argument("trailing characters");
        matrix.set(k, j, v);
      } catch (const std::logic_error&) {
        throw InvalidInput("matrix CSV cell (" + std::to_string(k) + "," + std::to_string(j) + ") is not a number");
      }
    }
  }
  if (k != k_max) throw InvalidInput("matrix CSV has " + std::to_string(k) + " rows, expected " + std::to_string(k_max));
  return matrix;
}

metrics::AccuracyMatrix read_matrix_csv(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError(file.string(), "cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_matrix_csv(ss.str());
  } catch (const InvalidInput& e) {
    throw IoError(file.string(), e.what());
  }
}

std::string metrics_csv(const metrics::AccuracyMatrix& matrix) {
  std::ostringstream out;
  out << "k,A_k,F_k\n";
  for (std::size_t k = 1; k <= matrix.task_count(); ++k) {
    out << k << ',' << fmt17(metrics::avg_incremental_accuracy(matrix, k)) << ',';
    if (k >= 2) out << fmt17(metrics::avg_forgetting(matrix, k));
    out << '\n';
  }
  return out.str();
}

Series accuracy_series(const std::string& label, const metrics::AccuracyMatrix& matrix) {
  Series s{label, {}, metrics::accuracy_series(matrix)};
  for (std::size_t k = 1; k <= s.y.size(); ++k) s.x.push_back(static_cast<double>(k));
  return s;
}

Series forgetting_series(const std::string& label, const metrics::AccuracyMatrix& matrix) {
  Series s{label, {}, metrics::forgetting_series(matrix)};
  for (std::size_t k = 2; k < s.y.size() + 2; ++k) s.x.push_back(static_cast<double>(k));
  return s;
}

std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};
  constexpr double width = 640, height = 400, left = 70, right = 150, top = 40, bottom = 55;
  const double plot_w = width - left - right, plot_h = height - top - bottom;

  double x_min = 1, x_max = 2, y_min = 0, y_max = 1;
  bool any = false;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!any) {
        x_min = x_max = s.x[i];
        any = true;
      }
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
    }
  }
  if (x_max <= x_min) x_max = x_min + 1;
  y_min = std::floor(y_min * 10.0) / 10.0;
  y_max = std::ceil(y_max * 10.0) / 10.0;
  if (y_max <= y_min) y_max = y_min + 1;
  auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return top + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h; };

  std::ostringstream svg;
  svg << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << width << R"(" height=")" << height
      << R"(" font-family="sans-serif" font-size="12">)" << '\n';
  svg << R"(<rect width="100%" height="100%" fill="white"/>)" << '\n';
  svg << R"(<text x=")" << left + plot_w / 2 << R"(" y="24" text-anchor="middle" font-size="15">)"
      << xml_escape(title) << "</text>\n";
  for (int i = 0; i <= 5; ++i) {
    const double y = y_min + (y_max - y_min) * i / 5.0;
    svg << R"(<line x1=")" << left << R"(" x2=")" << left + plot_w << R"(" y1=")" << py(y) << R"(" y2=")" << py(y)
        << R"(" stroke="#ddd"/>)" << '\n';
    svg << R"(<text x=")" << left - 8 << R"(" y=")" << py(y) + 4 << R"(" text-anchor="end">)" << fmt(y, 2)
        << "</text>\n";
  }
  for (double x = std::ceil(x_min); x <= x_max + 1e-9; x += 1.0) {
    svg << R"(<text x=")" << px(x) << R"(" y=")" << top + plot_h + 18 << R"(" text-anchor="middle">)" << fmt(x, 0)
        << "</text>\n";
  }
  svg << R"(<rect x=")" << left << R"(" y=")" << top << R"(" width=")" << plot_w << R"(" height=")" << plot_h
      << R"(" fill="none" stroke="#333"/>)" << '\n';
  svg << R"(<text x=")" << left + plot_w / 2 << R"(" y=")" << height - 12 << R"(" text-anchor="middle">)"
      << xml_escape(x_label) << "</text>\n";
  svg << R"svg(<text transform="translate(18,)svg" << top + plot_h / 2 << R"svg() rotate(-90)" text-anchor="middle">)svg"
      << xml_escape(y_label) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* colour = palette[s % std::size(palette)];
    std::ostringstream points;
    for (std::size_t i = 0; i < series[s].x.size(); ++i) points << px(series[s].x[i]) << ',' << py(series[s].y[i]) << ' ';
    svg << R"(<polyline fill="none" stroke-width="2" stroke=")" << colour << R"(" points=")" << points.str()
        << R"("/>)" << '\n';
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      svg << R"(<circle r="3" fill=")" << colour << R"(" cx=")" << px(series[s].x[i]) << R"(" cy=")"
          << py(series[s].y[i]) << R"("/>)" << '\n';
    }
    const double ly = top + 14 + 18.0 * static_cast<double>(s);
    svg << R"(<line x1=")" << left + plot_w + 12 << R"(" x2=")" << left + plot_w + 32 << R"(" y1=")" << ly
        << R"(" y2=")" << ly << R"(" stroke-width="2" stroke=")" << colour << R"("/>)" << '\n';
    svg << R"(<text x=")" << left + plot_w + 38 << R"(" y=")" << ly + 4 << R"(">)" << xml_escape(series[s].label)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError(file.string(), "cannot open for writing");
  out << text;
  if (!out) throw IoError(file.string(), "write failed");
}

void emit_outputs(const RunRecord& record, const ExperimentConfig& config, const fs::path& directory,
                  bool with_checkpoint) {
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw IoError(directory.string(), ec.message());
  write_text(directory / "config.json", to_json(config));
  if (!record.ok()) {
    write_text(directory / "error.txt", record.error + "\n");
    return;
  }
  const auto& matrix = *record.accuracy;
  write_text(directory / "accuracy_matrix.csv", matrix_csv(matrix));
  write_text(directory / "metrics.csv", metrics_csv(matrix));
  write_text(directory / "losses.csv", losses_csv(record));
  write_text(directory / "audit.txt", "old_task_train_reads_after_completion " +
                                          std::to_string(record.audit_violations) + "\n");
  const auto label = run_label(record);
  write_text(directory / "avg_accuracy.svg",
             line_plot_svg("Average incremental accuracy", "task k", "A_k", {accuracy_series(label, matrix)}));
  write_text(directory / "avg_forgetting.svg",
             line_plot_svg("Average forgetting", "task k", "F_k", {forgetting_series(label, matrix)}));
  if (with_checkpoint) checkpoint::save(directory / "checkpoint.bin", record.parameters, record.memory);
}

void emit_experiment(const ExperimentResult& result, const fs::path& directory) {
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw IoError(directory.string(), ec.message());
  write_text(directory / "config.json", to_json(result.config));

  std::ostringstream summary;
  summary << "method,seed,status,A_K,F_K,seconds,audit_violations\n";
  // Seed-averaged curves per method, in config order.
  std::map<continual::Method, std::pair<Series, Series>> curves;
  std::map<continual::Method, std::size_t> counts;
  for (const auto& run : result.runs) {
    const auto label = run_label(run);
    emit_outputs(run, result.config, directory / label / ("seed" + std::to_string(run.seed)));
    summary << label << ',' << run.seed << ',' << (run.ok() ? "ok" : "failed") << ',';
    if (run.ok()) {
      summary << fmt17(run.avg_accuracy.back()) << ',' << (run.avg_forgetting.empty() ? "" : fmt17(run.avg_forgetting.back()));
      auto a = accuracy_series(label, *run.accuracy);
      auto f = forgetting_series(label, *run.accuracy);
      auto [it, inserted] = curves.try_emplace(run.method, a, f);
      if (!inserted) {
        for (std::size_t i = 0; i < a.y.size(); ++i) it->second.first.y[i] += a.y[i];
        for (std::size_t i = 0; i < f.y.size(); ++i) it->second.second.y[i] += f.y[i];
      }
      ++counts[run.method];
    } else {
      summary << ',';
    }
    summary << ',' << fmt(run.total_seconds, 3) << ',' << run.audit_violations << '\n';
  }
  write_text(directory / "summary.csv", summary.str());

  std::vector<Series> acc, forget;
  for (auto m : result.config.methods) {
    auto it = curves.find(m);
    if (it == curves.end()) continue;
    const double n = static_cast<double>(counts[m]);
    for (auto& v : it->second.first.y) v /= n;
    for (auto& v : it->second.second.y) v /= n;
    acc.push_back(it->second.first);
    forget.push_back(it->second.second);
    curves.erase(it);
  }
  write_text(directory / "avg_accuracy.svg", line_plot_svg("Average incremental accuracy", "task k", "A_k", acc));
  write_text(directory / "avg_forgetting.svg", line_plot_svg("Average forgetting", "task k", "F_k", forget));
}

}  // namespace sfd::harness
