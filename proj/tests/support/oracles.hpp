#pragma once

// Reference computations written independently of the library: plain loops,
// long double accumulation, no shared helpers.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace sfd::oracle {

/// F(k,l) by direct quadruple summation.
inline Eigen::MatrixXd dct2(const Eigen::MatrixXd& f) {
  const auto n = static_cast<std::size_t>(f.rows());
  const long double pi = std::numbers::pi_v<long double>;
  auto c = [n](std::size_t k) { return k == 0 ? std::sqrt(1.0L / n) : std::sqrt(2.0L / n); };
  Eigen::MatrixXd out(n, n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < n; ++l) {
      long double s = 0.0L;
      for (std::size_t m = 0; m < n; ++m)
        for (std::size_t q = 0; q < n; ++q)
          s += f(m, q) * std::cos((2 * m + 1) * k * pi / (2 * n)) * std::cos((2 * q + 1) * l * pi / (2 * n));
      out(k, l) = static_cast<double>(c(k) * c(l) * s);
    }
  return out;
}

/// Basis function (k,l) of an h x w map evaluated at (m, q).
inline double dct_basis_2d(std::size_t k, std::size_t l, std::size_t m, std::size_t q, std::size_t h, std::size_t w) {
  const double pi = std::numbers::pi;
  const double ck = k == 0 ? std::sqrt(1.0 / h) : std::sqrt(2.0 / h);
  const double cl = l == 0 ? std::sqrt(1.0 / w) : std::sqrt(2.0 / w);
  return ck * cl * std::cos((2.0 * m + 1) * k * pi / (2.0 * h)) * std::cos((2.0 * q + 1) * l * pi / (2.0 * w));
}

/// a[k-1][j-1] holds the accuracy on task j after task k.
using Table = std::vector<std::vector<double>>;

inline double avg_accuracy(const Table& a, std::size_t k) {
  long double s = 0.0L;
  for (std::size_t j = 0; j < k; ++j) s += a[k - 1][j];
  return static_cast<double>(s / k);
}

inline double avg_forgetting(const Table& a, std::size_t k) {
  long double s = 0.0L;
  for (std::size_t j = 1; j < k; ++j) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t l = j; l < k; ++l) worst = std::max(worst, a[l - 1][j - 1] - a[k - 1][j - 1]);
    s += worst;
  }
  return static_cast<double>(s / (k - 1));
}

/// Index of the nearest row of `prototypes` (squared distance, first wins).
inline std::size_t nearest(const std::vector<std::vector<double>>& prototypes, const std::vector<double>& q) {
  std::size_t best = 0;
  long double best_d = std::numeric_limits<long double>::infinity();
  for (std::size_t i = 0; i < prototypes.size(); ++i) {
    long double d = 0.0L;
    for (std::size_t t = 0; t < q.size(); ++t) d += (prototypes[i][t] - q[t]) * (long double)(prototypes[i][t] - q[t]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

/// Monte-Carlo E_q[log q(z) - log p(z)] for q = N(mu, diag(sigma^2)), p = N(0, I).
inline double kl_monte_carlo(const std::vector<double>& mu, const std::vector<double>& sigma, std::size_t samples,
                             std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  long double total = 0.0L;
  for (std::size_t s = 0; s < samples; ++s) {
    long double log_ratio = 0.0L;
    for (std::size_t d = 0; d < mu.size(); ++d) {
      const double e = normal(rng);
      const double z = mu[d] + sigma[d] * e;
      // log q - log p; the 2 pi terms cancel.
      log_ratio += -0.5L * e * e - std::log(sigma[d]) + 0.5L * z * z;
    }
    total += log_ratio;
  }
  return static_cast<double>(total / samples);
}

/// 2-Wasserstein distance between N(mu_a, diag(sa^2)) and N(mu_b, diag(sb^2)).
inline double wasserstein(const std::vector<double>& mu_a, const std::vector<double>& sa,
                          const std::vector<double>& mu_b, const std::vector<double>& sb) {
  long double s = 0.0L;
  for (std::size_t d = 0; d < mu_a.size(); ++d) {
    s += (mu_a[d] - mu_b[d]) * (long double)(mu_a[d] - mu_b[d]);
    s += (sa[d] - sb[d]) * (long double)(sa[d] - sb[d]);
  }
  return static_cast<double>(std::sqrt(s));
}

}  // namespace sfd::oracle
