#include "igkit/autograd.hpp"

#include <unordered_set>
#include <utility>

#include "igkit/error.hpp"
#include "igkit/ops.hpp"

namespace igkit::ag {

namespace {

thread_local bool g_grad_enabled = true;

void accumulate(Node& node, Tensor&& g) {
  if (!node.requires_grad || g.empty()) return;
  if (g.shape() != node.value.shape())
    throw DimensionError("gradient shape " + shape_str(g.shape()) + " does not match value " +
                         shape_str(node.value.shape()));
  if (node.grad.empty())
    node.grad = std::move(g);
  else
    ops::axpy(1.0, g, node.grad);
}

// Post-order over nodes that require gradients; the loss ends up last.
std::vector<Node*> topo_order(Node* root) {
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{root, 0}};
  visited.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
      continue;
    }
    order.push_back(node);
    stack.pop_back();
  }
  return order;
}

}  // namespace

Var::Var(Tensor value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

Var make_op(Tensor value, const std::vector<Var>& inputs, BackwardFn backward) {
  Var out(std::move(value));
  if (!g_grad_enabled) return out;
  bool any = false;
  for (const auto& in : inputs) any = any || in.requires_grad();
  if (!any) return out;
  Node& n = *out.node();
  n.requires_grad = true;
  for (const auto& in : inputs) n.parents.push_back(in.node());
  n.backward = std::move(backward);
  return out;
}

void backward(const Var& loss) {
  if (!loss.defined() || loss.value().numel() != 1)
    throw ContractError("backward needs a scalar loss, got shape " +
                        (loss.defined() ? shape_str(loss.shape()) : std::string("<undefined>")));
  if (!loss.requires_grad()) return;
  const std::vector<Node*> order = topo_order(loss.node().get());
  for (Node* n : order) n->grad = Tensor();
  loss.node()->grad = Tensor(loss.shape(), 1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (!n->backward || n->grad.empty()) continue;
    std::vector<Tensor> grads = n->backward(n->grad);
    if (grads.size() != n->parents.size()) throw ContractError("backward rule returned the wrong gradient count");
    for (std::size_t i = 0; i < grads.size(); ++i) accumulate(*n->parents[i], std::move(grads[i]));
    // Interior gradients are no longer needed once propagated.
    if (!n->parents.empty()) n->grad = Tensor();
  }
}

Var ParameterSet::add(const std::string& name, Tensor init) {
  if (index_.count(name)) throw ContractError("duplicate parameter name: " + name);
  index_[name] = items_.size();
  items_.push_back({name, Var(std::move(init), true)});
  return items_.back().var;
}

void ParameterSet::extend(const std::string& prefix, const ParameterSet& other) {
  for (const auto& p : other.items_) {
    const std::string name = prefix + p.name;
    if (index_.count(name)) throw ContractError("duplicate parameter name: " + name);
    index_[name] = items_.size();
    items_.push_back({name, p.var});
  }
}

bool ParameterSet::contains(const std::string& name) const { return index_.count(name) != 0; }

Var& ParameterSet::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter: " + name);
  return items_[it->second].var;
}

const Var& ParameterSet::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter: " + name);
  return items_[it->second].var;
}

std::int64_t ParameterSet::count() const {
  std::int64_t n = 0;
  for (const auto& p : items_) n += static_cast<std::int64_t>(p.var.value().numel());
  return n;
}

void ParameterSet::assign(const std::map<std::string, Tensor>& values) {
  for (auto& p : items_) {
    auto it = values.find(p.name);
    if (it == values.end()) throw DataError("missing parameter: " + p.name);
    if (it->second.shape() != p.var.shape())
      throw DataError("parameter " + p.name + " has shape " + shape_str(it->second.shape()) + ", expected " +
                      shape_str(p.var.shape()));
    p.var.mutable_value() = it->second;
  }
}

std::map<std::string, Tensor> ParameterSet::snapshot() const {
  std::map<std::string, Tensor> out;
  for (const auto& p : items_) out.emplace(p.name, p.var.value());
  return out;
}

GradMap gradients(const Var& loss, const ParameterSet& params) {
  for (const auto& p : params.items()) p.var.node()->grad = Tensor();
  backward(loss);
  GradMap out;
  for (const auto& p : params.items()) {
    const Tensor& g = p.var.grad();
    out.emplace(p.name, g.empty() ? Tensor(p.var.shape()) : g);
  }
  return out;
}

}  // namespace igkit::ag
