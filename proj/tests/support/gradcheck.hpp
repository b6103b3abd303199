#pragma once

// Central finite-difference check of reverse-mode gradients.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "sfd/nn.hpp"
#include "sfd/tensor.hpp"

namespace sfd::check {

struct GradCheck {
  double max_relative_error = 0.0;
  std::string worst;  // name of the tensor with the largest error
  std::size_t checked = 0;
};

/// Compares d loss / d p for every tensor in `params` with central
/// differences of step `h`. Relative error per tensor:
///   ||analytic - numeric||_2 / max(||analytic||_2, ||numeric||_2, floor)
inline GradCheck check_gradients(const NamedTensors& params, const std::function<Tensor()>& loss, double h = 1e-6,
                                 double floor = 1e-8) {
  for (auto [name, p] : params) {
    p.set_requires_grad(true);
    p.zero_grad();
  }
  loss().backward();

  GradCheck out;
  for (auto [name, p] : params) {
    std::vector<double> analytic(p.numel(), 0.0);
    const auto g = p.grad();
    std::copy(g.begin(), g.end(), analytic.begin());
    std::vector<double> numeric(p.numel());
    auto values = p.mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = loss().item();
      values[i] = saved - h;
      const double down = loss().item();
      values[i] = saved;
      numeric[i] = (up - down) / (2.0 * h);
    }
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
      na += analytic[i] * analytic[i];
      nn += numeric[i] * numeric[i];
    }
    const double rel = std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nn), floor});
    out.checked += values.size();
    if (out.worst.empty() || rel > out.max_relative_error) {
      out.max_relative_error = rel;
      out.worst = name;
    }
  }
  return out;
}

}  // namespace sfd::check
