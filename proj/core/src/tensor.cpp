#include "sfd/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "sfd/error.hpp"

namespace sfd {

namespace {

thread_local bool g_grad_enabled = true;

void check_defined(const std::shared_ptr<detail::TensorImpl>& impl) {
  if (!impl) throw InvalidState("operation on an undefined tensor");
}

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::vector<double>& detail::TensorImpl::grad_buffer() {
  if (grad.empty()) grad.assign(data.size(), 0.0);
  return grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->data.assign(shape_numel(shape), value);
  impl->shape = std::move(shape);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape_numel(shape) != values.size()) {
    throw InvalidInput("tensor shape " + shape_string(shape) + " does not match " +
                       std::to_string(values.size()) + " values");
  }
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(values);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value) { return from({}, {value}); }

const Shape& Tensor::shape() const {
  check_defined(impl_);
  return impl_->shape;
}

std::size_t Tensor::dim(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size()) throw InvalidInput("axis out of range for shape " + shape_string(s));
  return s[axis];
}

std::size_t Tensor::numel() const {
  check_defined(impl_);
  return impl_->data.size();
}

std::span<const double> Tensor::data() const {
  check_defined(impl_);
  return impl_->data;
}

std::span<double> Tensor::mutable_data() {
  check_defined(impl_);
  return impl_->data;
}

std::vector<double> Tensor::to_vector() const {
  auto d = data();
  return {d.begin(), d.end()};
}

double Tensor::item() const {
  if (numel() != 1) throw InvalidInput("item() on tensor of shape " + shape_string(shape()));
  return impl_->data[0];
}

bool Tensor::requires_grad() const {
  check_defined(impl_);
  return impl_->requires_grad;
}

void Tensor::set_requires_grad(bool flag) {
  check_defined(impl_);
  impl_->requires_grad = flag;
}

std::span<const double> Tensor::grad() const {
  check_defined(impl_);
  return impl_->grad;
}

void Tensor::zero_grad() {
  check_defined(impl_);
  std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

void Tensor::backward() const {
  check_defined(impl_);
  if (impl_->data.size() != 1) {
    throw InvalidInput("backward() requires a one-element tensor, got " + shape_string(impl_->shape));
  }
  // Iterative post-order DFS gives a topological order (inputs before outputs).
  std::vector<detail::TensorImpl*> order;
  std::unordered_set<const detail::TensorImpl*> visited;
  std::vector<std::pair<detail::TensorImpl*, std::size_t>> stack{{impl_.get(), 0}};
  visited.insert(impl_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (node->node && next < node->node->inputs.size()) {
      auto* child = node->node->inputs[next++].get();
      if (visited.insert(child).second) stack.emplace_back(child, 0);
      continue;
    }
    order.push_back(node);
    stack.pop_back();
  }
  impl_->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    auto* t = *it;
    if (t->node && !t->grad.empty()) t->node->backward(*t);
  }
}

Tensor Tensor::clone() const {
  check_defined(impl_);
  return from(impl_->shape, impl_->data, impl_->requires_grad);
}

Tensor Tensor::detach() const {
  check_defined(impl_);
  return from(impl_->shape, impl_->data, false);
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() noexcept { return g_grad_enabled; }

namespace detail {

Tensor make_result(Shape shape, std::vector<double> data, const std::vector<Tensor>& inputs,
                   BackwardFn backward) {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(data);
  if (g_grad_enabled) {
    bool needs = std::any_of(inputs.begin(), inputs.end(),
                             [](const Tensor& t) { return t.impl()->requires_grad; });
    if (needs) {
      impl->requires_grad = true;
      auto node = std::make_shared<Node>();
      for (const auto& t : inputs) node->inputs.push_back(t.impl());
      node->backward = std::move(backward);
      impl->node = std::move(node);
    }
  }
  return Tensor(std::move(impl));
}

Tensor make_result(Shape shape, std::vector<double> data, std::initializer_list<Tensor> inputs,
                   BackwardFn backward) {
  return make_result(std::move(shape), std::move(data), std::vector<Tensor>(inputs), std::move(backward));
}

}  // namespace detail

}  // namespace sfd
