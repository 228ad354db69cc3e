#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pgsgan/numcore/precision.hpp"

PGSGAN_NAMESPACE_BEGIN
namespace num {

using Shape = std::vector<std::int64_t>;

std::int64_t numel_of(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<real> value;
  std::vector<real> grad;  // empty until something flows into it
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates into the inputs' grads.
  std::function<void(Node& self)> backward;

  std::vector<real>& grad_buffer();
};

}  // namespace detail

// Dense row-major array; a cheap handle onto a node of the autodiff graph.
// Copies of a Tensor alias the same storage.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(const Shape& shape, bool requires_grad = false);
  static Tensor full(const Shape& shape, real value, bool requires_grad = false);
  static Tensor from(const Shape& shape, std::vector<real> values, bool requires_grad = false);
  static Tensor scalar(real value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::int64_t dim(int axis) const;
  int rank() const { return static_cast<int>(node_->shape.size()); }
  std::int64_t numel() const { return static_cast<std::int64_t>(node_->value.size()); }

  std::span<const real> data() const { return node_->value; }
  std::span<real> mutable_data() { return node_->value; }
  real item() const;
  real at(std::int64_t flat) const { return node_->value[flat]; }

  bool requires_grad() const { return node_->requires_grad; }
  // Zeros when nothing has been accumulated.
  std::vector<real> grad() const;
  bool has_grad() const { return !node_->grad.empty(); }
  void zero_grad() { node_->grad.clear(); }

  // Fresh leaf holding a copy of the values, outside any graph.
  Tensor detach() const;

  detail::Node* node() const { return node_.get(); }
  const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }

  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

// Graph recording switch; thread-local.
class GradMode {
 public:
  static bool enabled();
  static void set_enabled(bool on);
};

class NoGradGuard {
 public:
  NoGradGuard() : previous_(GradMode::enabled()) { GradMode::set_enabled(false); }
  ~NoGradGuard() { GradMode::set_enabled(previous_); }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Builds an op result. When grad mode is on and any input requires grad,
// the result records `inputs` and `backward`; otherwise it is a plain leaf.
Tensor make_result(Shape shape, std::vector<real> value, std::initializer_list<Tensor> inputs,
                   std::function<void(detail::Node& self)> backward);
Tensor make_result(Shape shape, std::vector<real> value, const std::vector<Tensor>& inputs,
                   std::function<void(detail::Node& self)> backward);

// Reverse-mode accumulation from a scalar loss into every reachable tensor
// that requires grad. Throws ShapeError for a non-scalar loss.
void backward(const Tensor& loss);

}  // namespace num
PGSGAN_NAMESPACE_END
