#pragma once

// Reverse-mode differentiation over tensor-core operations.
//
// A Var is a shared handle to a graph node. Copies of a Var refer to the same
// node, so a parameter held by several modules is updated in one place.

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "igkit/tensor.hpp"

namespace igkit::ag {

/// Returns one gradient per recorded input, in input order. An empty tensor
/// means "no contribution" and is skipped.
using BackwardFn = std::function<std::vector<Tensor>(const Tensor& grad_out)>;

struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  BackwardFn backward;
};

class Var {
 public:
  Var() = default;
  explicit Var(Tensor value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  /// In-place access for optimizers and checkpoint loading.
  Tensor& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  /// Accumulated gradient after backward(); empty if none reached this node.
  const Tensor& grad() const { return node_->grad; }
  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Disables graph recording on this thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

/// Wraps an op result. The backward rule is recorded only when recording is
/// enabled and at least one input requires a gradient.
Var make_op(Tensor value, const std::vector<Var>& inputs, BackwardFn backward);

/// Runs reverse accumulation from a scalar ([1]-shaped) loss. Gradients of
/// every node reachable from the loss are reset first, so repeated calls do
/// not accumulate across passes.
void backward(const Var& loss);

// ---- named parameters ------------------------------------------------------

struct Parameter {
  std::string name;
  Var var;
};

using GradMap = std::map<std::string, Tensor>;

/// Ordered, uniquely named parameter collection. Insertion order is the
/// canonical order for checkpoints and optimizer state.
class ParameterSet {
 public:
  /// Registers a trainable leaf; throws ContractError on a duplicate name.
  Var add(const std::string& name, Tensor init);
  /// Appends every parameter of `other` with `prefix` prepended to its name.
  void extend(const std::string& prefix, const ParameterSet& other);

  const std::vector<Parameter>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool contains(const std::string& name) const;
  Var& get(const std::string& name);
  const Var& get(const std::string& name) const;
  /// Total scalar count.
  std::int64_t count() const;

  /// Copies values by name; every parameter must be present with its shape.
  void assign(const std::map<std::string, Tensor>& values);
  std::map<std::string, Tensor> snapshot() const;

 private:
  std::vector<Parameter> items_;
  std::map<std::string, std::size_t> index_;
};

/// backward(loss) followed by collection of parameter gradients by name.
/// Parameters the loss does not depend on receive zero tensors.
GradMap gradients(const Var& loss, const ParameterSet& params);

}  // namespace igkit::ag
