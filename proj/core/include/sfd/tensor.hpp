#pragma once

// Dense row-major tensors of doubles with tape-free reverse-mode autodiff.
//
// Every differentiable op returns a fresh Tensor whose node remembers its
// inputs and a closure that pushes the output gradient back into them.
// Calling backward() on a scalar walks that graph in reverse topological
// order. Tensor is a cheap handle: copies share storage, clone() does not.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sfd {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {

struct TensorImpl;

struct Node {
  std::vector<std::shared_ptr<TensorImpl>> inputs;
  // Reads the output's gradient and accumulates into the inputs' gradients.
  std::function<void(const TensorImpl& output)> backward;
};

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad = false;
  std::shared_ptr<Node> node;

  std::vector<double>& grad_buffer();
};

}  // namespace detail

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value);

  bool defined() const noexcept { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> data() const;
  std::span<double> mutable_data();
  std::vector<double> to_vector() const;
  double item() const;

  bool requires_grad() const;
  void set_requires_grad(bool flag);

  /// Empty span when no gradient has been accumulated yet.
  std::span<const double> grad() const;
  void zero_grad();

  /// Seeds d(self)/d(self) = 1 and propagates. Only valid on one-element tensors.
  void backward() const;

  /// Deep copy with no graph history. Keeps requires_grad.
  Tensor clone() const;
  /// Same values, new storage, no history, requires_grad = false.
  Tensor detach() const;

  /// Identity of the underlying storage.
  const void* id() const noexcept { return impl_.get(); }

  // Used by op implementations.
  explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}
  const std::shared_ptr<detail::TensorImpl>& impl() const noexcept { return impl_; }

 private:
  std::shared_ptr<detail::TensorImpl> impl_;
};

/// Graph recording is on by default; this disables it for the current thread
/// inside its scope.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled() noexcept;

namespace detail {

using BackwardFn = std::function<void(const TensorImpl& output)>;

/// Builds an op result and, when any input needs a gradient and recording is
/// enabled, attaches the backward closure.
Tensor make_result(Shape shape, std::vector<double> data, std::initializer_list<Tensor> inputs,
                   BackwardFn backward);
Tensor make_result(Shape shape, std::vector<double> data, const std::vector<Tensor>& inputs,
                   BackwardFn backward);

}  // namespace detail

}  // namespace sfd
