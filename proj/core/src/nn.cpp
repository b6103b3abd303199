#include "sfd/nn.hpp"

#include <cmath>

#include "sfd/error.hpp"
#include "sfd/ops.hpp"

namespace sfd {

void append_prefixed(NamedTensors& out, const std::string& prefix, const NamedTensors& items) {
  for (const auto& [name, t] : items) out.emplace_back(prefix + "." + name, t);
}

NamedTensors clone_all(const NamedTensors& params) {
  NamedTensors out;
  out.reserve(params.size());
  for (const auto& [name, t] : params) out.emplace_back(name, t.clone());
  return out;
}

void copy_values(const NamedTensors& source, const NamedTensors& target) {
  if (source.size() != target.size()) throw InvalidInput("copy_values: parameter counts differ");
  for (std::size_t i = 0; i < source.size(); ++i) {
    const auto& [sname, src] = source[i];
    const auto& [tname, dst] = target[i];
    if (sname != tname || src.shape() != dst.shape()) {
      throw InvalidInput("copy_values: mismatch at " + sname + " vs " + tname);
    }
    auto out = Tensor(dst).mutable_data();
    auto in = src.data();
    std::copy(in.begin(), in.end(), out.begin());
  }
}

std::size_t parameter_count(const NamedTensors& params) {
  std::size_t n = 0;
  for (const auto& [_, t] : params) n += t.numel();
  return n;
}

Tensor he_normal(Shape shape, std::size_t fan_in, Rng& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  std::vector<double> values(shape_numel(shape));
  for (auto& v : values) v = dist(rng);
  return Tensor::from(std::move(shape), std::move(values), true);
}

Linear Linear::make(std::size_t in, std::size_t out, Rng& rng) {
  return {he_normal({in, out}, in, rng), Tensor::zeros({out}, true)};
}

Linear Linear::zeros(std::size_t in, std::size_t out) {
  return {Tensor::zeros({in, out}, true), Tensor::zeros({out}, true)};
}

Tensor Linear::forward(const Tensor& x) const { return ops::add_bias(ops::matmul(x, weight), bias); }

NamedTensors Linear::parameters() const { return {{"weight", weight}, {"bias", bias}}; }

Linear Linear::clone() const { return {weight.clone(), bias.clone()}; }

Adam::Adam(NamedTensors params, AdamOptions options) : params_(std::move(params)), options_(options) {
  for (const auto& [_, t] : params_) {
    first_moment_.emplace_back(t.numel(), 0.0);
    second_moment_.emplace_back(t.numel(), 0.0);
  }
}

void Adam::zero_grad() {
  for (auto& [_, t] : params_) t.zero_grad();
}

void Adam::step() {
  ++step_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& t = params_[i].second;
    auto g = t.grad();
    if (g.empty()) continue;
    auto w = t.mutable_data();
    auto& m = first_moment_[i];
    auto& v = second_moment_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = b1 * m[j] + (1.0 - b1) * g[j];
      v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
      const double mhat = m[j] / correction1;
      const double vhat = v[j] / correction2;
      w[j] -= options_.learning_rate * mhat / (std::sqrt(vhat) + options_.epsilon);
    }
  }
}

}  // namespace sfd
