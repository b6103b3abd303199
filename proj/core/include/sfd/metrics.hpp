#pragma once

#include <cstddef>
#include <vector>

namespace sfd::metrics {

/// Lower-triangular accuracy table. at(k, j) is the accuracy on task j after
/// training through task k, both 1-based with 1 <= j <= k <= K.
class AccuracyMatrix {
 public:
  AccuracyMatrix() = default;
  explicit AccuracyMatrix(std::size_t task_count);

  std::size_t task_count() const noexcept { return rows_.size(); }
  double at(std::size_t k, std::size_t j) const;
  /// Throws InvalidInput outside the triangle or for a value outside [0, 1].
  void set(std::size_t k, std::size_t j, double accuracy);
  /// Row k as a vector of length k.
  const std::vector<double>& row(std::size_t k) const;

  friend bool operator==(const AccuracyMatrix&, const AccuracyMatrix&) = default;

 private:
  std::vector<std::vector<double>> rows_;
};

/// A_k = (1/k) sum_{j<=k} a[k][j]
double avg_incremental_accuracy(const AccuracyMatrix& matrix, std::size_t k);

/// F_k = (1/(k-1)) sum_{j<k} max_{j<=l<k} (a[l][j] - a[k][j]); not clamped.
double avg_forgetting(const AccuracyMatrix& matrix, std::size_t k);

/// A_1..A_K
std::vector<double> accuracy_series(const AccuracyMatrix& matrix);
/// F_2..F_K
std::vector<double> forgetting_series(const AccuracyMatrix& matrix);

}  // namespace sfd::metrics
