#include "pgsgan/numcore/tensor.hpp"

#include <sstream>
#include <unordered_set>

#include "pgsgan/errors.hpp"

PGSGAN_NAMESPACE_BEGIN
namespace num {

std::int64_t numel_of(const Shape& shape) {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

namespace detail {

std::vector<real>& Node::grad_buffer() {
  if (grad.empty()) grad.assign(value.size(), real(0));
  return grad;
}

}  // namespace detail

namespace {

thread_local bool grad_enabled = true;

void check_shape(const Shape& shape, std::size_t count) {
  for (auto d : shape) {
    if (d <= 0) throw ShapeError("tensor dimensions must be positive: " + shape_string(shape));
  }
  if (static_cast<std::size_t>(numel_of(shape)) != count) {
    throw ShapeError("shape " + shape_string(shape) + " does not match " + std::to_string(count) +
                     " values");
  }
}

}  // namespace

bool GradMode::enabled() { return grad_enabled; }
void GradMode::set_enabled(bool on) { grad_enabled = on; }

Tensor Tensor::zeros(const Shape& shape, bool requires_grad) {
  return full(shape, real(0), requires_grad);
}

Tensor Tensor::full(const Shape& shape, real value, bool requires_grad) {
  return from(shape, std::vector<real>(static_cast<std::size_t>(numel_of(shape)), value), requires_grad);
}

Tensor Tensor::from(const Shape& shape, std::vector<real> values, bool requires_grad) {
  check_shape(shape, values.size());
  auto node = std::make_shared<detail::Node>();
  node->shape = shape;
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(real value, bool requires_grad) { return from({1}, {value}, requires_grad); }

std::int64_t Tensor::dim(int axis) const {
  if (axis < 0) axis += rank();
  if (axis < 0 || axis >= rank()) throw ShapeError("axis out of range for " + shape_string(shape()));
  return node_->shape[axis];
}

real Tensor::item() const {
  if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape_string(shape()));
  return node_->value[0];
}

std::vector<real> Tensor::grad() const {
  if (node_->grad.empty()) return std::vector<real>(node_->value.size(), real(0));
  return node_->grad;
}

Tensor Tensor::detach() const { return from(shape(), node_->value, false); }

Tensor make_result(Shape shape, std::vector<real> value, const std::vector<Tensor>& inputs,
                   std::function<void(detail::Node& self)> backward) {
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  if (GradMode::enabled()) {
    for (const auto& in : inputs) {
      if (in.defined() && in.requires_grad()) {
        node->requires_grad = true;
        break;
      }
    }
  }
  if (node->requires_grad) {
    for (const auto& in : inputs) {
      if (in.defined()) node->inputs.push_back(in.node_ptr());
    }
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

Tensor make_result(Shape shape, std::vector<real> value, std::initializer_list<Tensor> inputs,
                   std::function<void(detail::Node& self)> backward) {
  return make_result(std::move(shape), std::move(value), std::vector<Tensor>(inputs),
                     std::move(backward));
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw ShapeError("backward() needs a scalar loss, got " +
                     (loss.defined() ? shape_string(loss.shape()) : std::string("undefined")));
  }
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS; `order` ends up topologically sorted.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{loss.node(), 0}};
  seen.insert(loss.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      detail::Node* child = node->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->grad_buffer()[0] += real(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
}

}  // namespace num
PGSGAN_NAMESPACE_END
