#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sfd/tensor.hpp"

namespace sfd {

using Rng = std::mt19937_64;

/// Ordered (name, tensor) pairs. Tensors are handles, so a NamedTensors list
/// aliases the owning module's storage.
using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

/// Prefixes every name with `prefix.` and appends to `out`.
void append_prefixed(NamedTensors& out, const std::string& prefix, const NamedTensors& items);

/// Deep copies; the result shares nothing with the input.
NamedTensors clone_all(const NamedTensors& params);

/// Copies values name-by-name from `source` into `target`. Names and shapes must match.
void copy_values(const NamedTensors& source, const NamedTensors& target);

std::size_t parameter_count(const NamedTensors& params);

/// Fan-in scaled Gaussian (He) initialization.
Tensor he_normal(Shape shape, std::size_t fan_in, Rng& rng);

/// Fully connected layer computing x W + b with W stored as [in, out].
struct Linear {
  Tensor weight;
  Tensor bias;

  static Linear make(std::size_t in, std::size_t out, Rng& rng);
  static Linear zeros(std::size_t in, std::size_t out);

  std::size_t in_features() const { return weight.dim(0); }
  std::size_t out_features() const { return weight.dim(1); }

  Tensor forward(const Tensor& x) const;
  NamedTensors parameters() const;
  Linear clone() const;
};

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam over a fixed list of leaf tensors. Moments are kept per parameter
/// in registration order.
class Adam {
 public:
  Adam(NamedTensors params, AdamOptions options = {});

  void zero_grad();
  void step();

  std::size_t steps() const noexcept { return step_; }
  const AdamOptions& options() const noexcept { return options_; }

 private:
  NamedTensors params_;
  AdamOptions options_;
  std::vector<std::vector<double>> first_moment_;
  std::vector<std::vector<double>> second_moment_;
  std::size_t step_ = 0;
};

}  // namespace sfd
