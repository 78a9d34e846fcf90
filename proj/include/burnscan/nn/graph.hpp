#pragma once

// Reverse-mode autodiff on a tape. Operations append nodes in execution
// order; backward() walks the tape in reverse, so every node's gradient is
// complete before its backprop closure runs. Parameters are leaf nodes that
// live outside any tape and keep their gradient buffers across steps.

#include <functional>
#include <memory>
#include <vector>

#include "burnscan/nn/tensor.hpp"
#include "burnscan/util/error.hpp"

namespace burnscan::nn {

template <typename T>
struct Node {
  Tensor<T> val;
  Tensor<T> grad;  // empty until some gradient reaches this node
  bool needs_grad = false;
  std::vector<std::shared_ptr<Node<T>>> inputs;  // keeps producers alive
  std::function<void(Node<T>&)> backprop;

  Tensor<T>& ensure_grad() {
    if (grad.v.empty()) grad = Tensor<T>::zeros(val.shape);
    return grad;
  }
};

template <typename T>
using NodePtr = std::shared_ptr<Node<T>>;

// Trainable leaf; gradient accumulates until the optimizer clears it.
template <typename T>
NodePtr<T> make_param(std::vector<long> shape) {
  auto n = std::make_shared<Node<T>>();
  n->val = Tensor<T>::zeros(std::move(shape));
  n->needs_grad = true;
  n->ensure_grad();
  return n;
}

// Non-trainable leaf (network input, labels).
template <typename T>
NodePtr<T> make_input(Tensor<T> val) {
  auto n = std::make_shared<Node<T>>();
  n->val = std::move(val);
  return n;
}

// In backprop closures: destination for a gradient contribution, or nullptr
// when the input does not participate in differentiation.
template <typename T>
T* grad_sink(const NodePtr<T>& n) {
  return n->needs_grad ? n->ensure_grad().data() : nullptr;
}

template <typename T>
class Graph {
 public:
  NodePtr<T> op(Tensor<T> val, std::vector<NodePtr<T>> inputs,
                std::function<void(Node<T>&)> backprop) {
    auto n = std::make_shared<Node<T>>();
    n->val = std::move(val);
    for (const auto& in : inputs) n->needs_grad = n->needs_grad || in->needs_grad;
    n->inputs = std::move(inputs);
    if (n->needs_grad) n->backprop = std::move(backprop);
    tape_.push_back(n);
    return n;
  }

  // Seeds d(root)/d(root) = 1 and propagates to every contributing node.
  // Nodes whose gradient buffer stays empty were not on a path to the root
  // and are skipped.
  void backward(const NodePtr<T>& root) {
    if (root->val.numel() != 1)
      throw Error(Errc::shape_error, "backward expects a scalar root");
    if (tape_.empty() || tape_.back() != root)
      throw Error(Errc::invalid_argument, "backward root must be the newest node");
    root->ensure_grad().v[0] = T(1);
    for (auto it = tape_.rbegin(); it != tape_.rend(); ++it) {
      Node<T>& n = **it;
      if (n.needs_grad && n.backprop && !n.grad.v.empty()) n.backprop(n);
    }
  }

  void clear() { tape_.clear(); }
  std::size_t size() const { return tape_.size(); }

 private:
  std::vector<NodePtr<T>> tape_;
};

}  // namespace burnscan::nn
