#include "pdl/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "pdl/error.hpp"

namespace pdl {

namespace {
thread_local Tape* g_active_tape = nullptr;
}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Buffer& detail::Node::grad_buffer() {
  if (grad.empty()) grad.assign(value.size(), 0.0);
  return grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const std::size_t n = shape_numel(shape);
  return from(std::move(shape), Buffer(n, value), requires_grad);
}

Tensor Tensor::from(Shape shape, std::span<const double> values, bool requires_grad) {
  return from(std::move(shape), Buffer(values.begin(), values.end()), requires_grad);
}

Tensor Tensor::from(Shape shape, Buffer values, bool requires_grad) {
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("tensor: dimensions must be positive, got " + shape_str(shape));
  }
  if (shape_numel(shape) != values.size()) {
    throw ShapeError("tensor: shape " + shape_str(shape) + " does not hold " + std::to_string(values.size()) +
                     " values");
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({1}, {value}, requires_grad); }

const Shape& Tensor::shape() const { return node_->shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= node_->shape.size()) {
    throw ShapeError("tensor: axis " + std::to_string(axis) + " out of range for " + shape_str(node_->shape));
  }
  return node_->shape[axis];
}

std::size_t Tensor::numel() const { return node_->value.size(); }

std::span<const double> Tensor::data() const { return node_->value; }
std::span<double> Tensor::mutable_data() { return node_->value; }

double Tensor::item() const {
  if (numel() != 1) throw ShapeError("item: tensor " + shape_str(shape()) + " is not a scalar");
  return node_->value[0];
}

bool Tensor::requires_grad() const { return node_->requires_grad; }

void Tensor::set_requires_grad(bool on) {
  if (!node_->leaf) throw ValidationError("set_requires_grad: only leaf tensors can change gradient tracking");
  node_->requires_grad = on;
}

bool Tensor::is_leaf() const { return node_->leaf; }
bool Tensor::has_grad() const { return !node_->grad.empty(); }
std::span<const double> Tensor::grad() const { return node_->grad; }
void Tensor::zero_grad() { node_->grad.clear(); }

Tensor Tensor::detach() const { return from(node_->shape, node_->value, false); }

Tensor Tensor::clone() const { return from(node_->shape, node_->value, node_->requires_grad); }

void Tape::record(std::shared_ptr<detail::Node> node) {
  if (consumed_) throw ValidationError("tape: cannot record onto a consumed tape; call reset() first");
  nodes_.push_back(std::move(node));
}

void Tape::reset() {
  nodes_.clear();
  consumed_ = false;
}

void Tape::backward(const Tensor& loss) {
  if (consumed_) throw ValidationError("backward: tape already consumed; reset() before another backward");
  if (nodes_.empty()) throw ValidationError("backward: tape is empty");
  if (!loss.defined() || loss.numel() != 1) {
    throw ShapeError("backward: loss must be a scalar, got " + (loss.defined() ? shape_str(loss.shape()) : "undefined"));
  }
  if (!loss.requires_grad() || loss.is_leaf()) {
    throw ValidationError("backward: loss was not produced by an op recorded on this tape");
  }
  const auto& loss_node = loss.node();
  auto it = std::find(nodes_.rbegin(), nodes_.rend(), loss_node);
  if (it == nodes_.rend()) throw ValidationError("backward: loss was not recorded on this tape");

  // Intermediate gradients from any earlier replay are stale.
  for (auto& n : nodes_) n->grad.clear();
  loss_node->grad_buffer()[0] = 1.0;
  for (; it != nodes_.rend(); ++it) {
    detail::Node& n = **it;
    if (n.grad.empty() || !n.backward) continue;
    n.backward(n.grad);
  }
  consumed_ = true;
}

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = previous_; }

NoGradScope::NoGradScope() : previous_(g_active_tape) { g_active_tape = nullptr; }
NoGradScope::~NoGradScope() { g_active_tape = previous_; }

Tape* active_tape() { return g_active_tape; }

}  // namespace pdl
