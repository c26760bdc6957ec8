#include "trajformer/numerics/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace trajformer::nn {

namespace {
thread_local bool g_grad_enabled = true;
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::vector<double>& detail::Node::grad_buffer() {
  if (grad.empty()) grad.assign(value.size(), 0.0);
  return grad;
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape_numel(shape) != values.size()) {
    throw DimensionError("tensor shape " + shape_to_string(shape) + " does not hold " +
                         std::to_string(values.size()) + " values");
  }
  node_ = std::make_shared<detail::Node>();
  node_->shape = std::move(shape);
  node_->value = std::move(values);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const auto n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor(Shape{}, {value}, requires_grad);
}

detail::Node& Tensor::node() const {
  if (!node_) throw GraphError("use of undefined tensor");
  return *node_;
}

const Shape& Tensor::shape() const { return node().shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " +
                         shape_to_string(s));
  }
  return s[axis];
}

std::size_t Tensor::numel() const { return node().value.size(); }

std::span<const double> Tensor::data() const { return node().value; }
std::span<double> Tensor::mutable_data() { return node().value; }
std::vector<double> Tensor::to_vector() const { return node().value; }

double Tensor::item() const {
  if (numel() != 1) {
    throw DimensionError("item() on tensor of shape " + shape_to_string(shape()));
  }
  return node().value[0];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  const auto& s = shape();
  if (index.size() != s.size()) throw DimensionError("index rank mismatch");
  std::size_t flat = 0;
  std::size_t axis = 0;
  for (auto i : index) {
    if (i >= s[axis]) throw DimensionError("index out of range");
    flat = flat * s[axis] + i;
    ++axis;
  }
  return node().value[flat];
}

bool Tensor::requires_grad() const { return node().requires_grad; }
bool Tensor::is_leaf() const { return node().is_leaf; }
bool Tensor::has_grad() const { return !node().grad.empty(); }

std::span<const double> Tensor::grad() const {
  auto& n = node();
  if (n.grad.empty()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

std::span<double> Tensor::mutable_grad() { return node().grad_buffer(); }

void Tensor::zero_grad() { std::fill(node().grad.begin(), node().grad.end(), 0.0); }

Tensor Tensor::detach() const {
  return Tensor(shape(), node().value, false);
}

Tensor Tensor::clone() const {
  Tensor t(shape(), node().value, requires_grad());
  return t;
}

Tensor Tensor::make_result(Shape shape, std::vector<double> values, const char* op,
                           std::vector<Tensor> parents,
                           std::function<void(detail::Node&)> backward_fn) {
  Tensor out(std::move(shape), std::move(values), false);
  out.node_->op = op;
  out.node_->is_leaf = false;
  if (!g_grad_enabled) return out;
  const bool any = std::any_of(parents.begin(), parents.end(),
                               [](const Tensor& p) { return p.defined() && p.requires_grad(); });
  if (!any) return out;
  out.node_->requires_grad = true;
  out.node_->parents.reserve(parents.size());
  for (auto& p : parents) out.node_->parents.push_back(p.node_);
  out.node_->backward_fn = std::move(backward_fn);
  return out;
}

void Tensor::backward() {
  auto& root = node();
  if (root.value.size() != 1) {
    throw GraphError("backward() requires a scalar, got shape " + shape_to_string(root.shape));
  }
  if (root.consumed) throw GraphError("backward() called twice on the same graph");
  if (!root.requires_grad) throw GraphError("backward() on a tensor without a recorded graph");

  // Iterative post-order DFS gives a topological order without recursion.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> visited;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{&root, 0}};
  visited.insert(&root);
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      detail::Node* p = n->parents[next++].get();
      if (p && p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  root.grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* n = *it;
    if (n->is_leaf) continue;
    if (n->consumed) throw GraphError("backward() through an already consumed graph");
    if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
  }
  for (auto* n : order) {
    if (n->is_leaf) continue;
    n->consumed = true;
    n->backward_fn = nullptr;
    n->parents.clear();
    if (n != &root) std::vector<double>().swap(n->grad);
  }
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

}  // namespace trajformer::nn
