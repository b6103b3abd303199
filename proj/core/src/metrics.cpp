#include "sfd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sfd/error.hpp"

namespace sfd::metrics {

AccuracyMatrix::AccuracyMatrix(std::size_t task_count) {
  for (std::size_t k = 1; k <= task_count; ++k) rows_.emplace_back(k, 0.0);
}

double AccuracyMatrix::at(std::size_t k, std::size_t j) const {
  if (k < 1 || k > task_count() || j < 1 || j > k) {
    throw InvalidInput("accuracy index (" + std::to_string(k) + "," + std::to_string(j) + ") outside the triangle");
  }
  return rows_[k - 1][j - 1];
}

void AccuracyMatrix::set(std::size_t k, std::size_t j, double accuracy) {
  if (k < 1 || k > task_count() || j < 1 || j > k) {
    throw InvalidInput("accuracy index (" + std::to_string(k) + "," + std::to_string(j) + ") outside the triangle");
  }
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) throw InvalidInput("accuracy must lie in [0, 1]");
  rows_[k - 1][j - 1] = accuracy;
}

const std::vector<double>& AccuracyMatrix::row(std::size_t k) const {
  if (k < 1 || k > task_count()) throw InvalidInput("row " + std::to_string(k) + " out of range");
  return rows_[k - 1];
}

double avg_incremental_accuracy(const AccuracyMatrix& matrix, std::size_t k) {
  if (k < 1 || k > matrix.task_count()) {
    throw InvalidInput("A_k needs 1 <= k <= " + std::to_string(matrix.task_count()) + ", got " + std::to_string(k));
  }
  double s = 0.0;
  for (double v : matrix.row(k)) s += v;
  return s / static_cast<double>(k);
}

double avg_forgetting(const AccuracyMatrix& matrix, std::size_t k) {
  if (k < 2 || k > matrix.task_count()) {
    throw InvalidInput("F_k needs 2 <= k <= " + std::to_string(matrix.task_count()) + ", got " + std::to_string(k));
  }
  double total = 0.0;
  for (std::size_t j = 1; j < k; ++j) {
    double worst = -std::numeric_limits<double>::infinity();
    // a[l][j] only exists for l >= j.
    for (std::size_t l = j; l < k; ++l) worst = std::max(worst, matrix.at(l, j) - matrix.at(k, j));
    total += worst;
  }
  return total / static_cast<double>(k - 1);
}

std::vector<double> accuracy_series(const AccuracyMatrix& matrix) {
  std::vector<double> out;
  for (std::size_t k = 1; k <= matrix.task_count(); ++k) out.push_back(avg_incremental_accuracy(matrix, k));
  return out;
}

std::vector<double> forgetting_series(const AccuracyMatrix& matrix) {
  std::vector<double> out;
  for (std::size_t k = 2; k <= matrix.task_count(); ++k) out.push_back(avg_forgetting(matrix, k));
  return out;
}

}  // namespace sfd::metrics
