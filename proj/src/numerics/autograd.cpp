#include "thzgan/numerics/autograd.hpp"

#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "thzgan/errors.hpp"
#include "thzgan/numerics/ops.hpp"

namespace thzgan::num {

namespace {

thread_local bool g_grad_mode = true;

class GradModeScope {
 public:
  explicit GradModeScope(bool enabled) : previous_(g_grad_mode) { g_grad_mode = enabled; }
  ~GradModeScope() { g_grad_mode = previous_; }

 private:
  bool previous_;
};

}  // namespace

bool grad_mode_enabled() noexcept { return g_grad_mode; }

NoGradGuard::NoGradGuard() : previous_(g_grad_mode) { g_grad_mode = false; }
NoGradGuard::~NoGradGuard() { g_grad_mode = previous_; }

void record(Tensor& out, std::string op, std::vector<Tensor> inputs, BackwardFn backward) {
  if (!g_grad_mode) return;
  bool any = false;
  for (const auto& t : inputs) any = any || t.requires_grad();
  if (!any) return;
  auto node = std::make_shared<Node>();
  node->op = std::move(op);
  node->inputs = std::move(inputs);
  node->backward = std::move(backward);
  node->output = out.key();
  out.impl()->grad_fn = std::move(node);
  out.impl()->requires_grad = true;
}

Graph Graph::trace(const Tensor& output) {
  Graph graph;
  if (!output.defined() || !output.impl()->grad_fn) return graph;

  // Iterative post-order DFS: a node is emitted after all of its producers.
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  Node* root = output.impl()->grad_fn.get();
  stack.emplace_back(root, 0);
  visited.insert(root);
  while (!stack.empty()) {
    Node* node = stack.back().first;
    std::size_t next = stack.back().second;
    if (next < node->inputs.size()) {
      ++stack.back().second;
      const auto& input = node->inputs[next];
      Node* producer = input.impl()->grad_fn.get();
      if (producer && visited.insert(producer).second) stack.emplace_back(producer, 0);
    } else {
      graph.order_.push_back(node);
      stack.pop_back();
    }
  }
  return graph;
}

namespace {

void accumulate(std::unordered_map<TensorImpl*, Tensor>& grads, TensorImpl* key, const Tensor& g) {
  auto [it, inserted] = grads.try_emplace(key, g);
  if (!inserted) it->second = add(it->second, g);
}

// Shared engine: propagates from `output` and returns the accumulated
// gradient map restricted to `targets`.
std::unordered_map<TensorImpl*, Tensor> run_backward(const Tensor& output,
                                                     const std::unordered_set<TensorImpl*>& targets,
                                                     bool create_graph) {
  if (!output.defined()) throw ContractError("backward on an undefined tensor");
  if (output.numel() != 1) {
    throw ContractError("backward requires a single-element output, got shape " + shape_str(output.shape()));
  }
  std::unordered_map<TensorImpl*, Tensor> grads;
  if (targets.contains(output.key())) grads.emplace(output.key(), Tensor::ones(output.shape()));
  if (!output.impl()->grad_fn) return grads;

  Graph graph = Graph::trace(output);
  const auto& order = graph.nodes();

  // A node is worth visiting only if some target lies upstream of it.
  std::unordered_map<Node*, std::vector<bool>> needs;
  needs.reserve(order.size());
  std::unordered_set<Node*> relevant;
  for (Node* node : order) {
    std::vector<bool> flags(node->inputs.size(), false);
    bool any = false;
    for (std::size_t i = 0; i < node->inputs.size(); ++i) {
      const auto& input = node->inputs[i];
      if (!input.requires_grad()) continue;
      Node* producer = input.impl()->grad_fn.get();
      bool want = targets.contains(input.key()) || (producer && relevant.contains(producer));
      flags[i] = want;
      any = any || want;
    }
    if (any) relevant.insert(node);
    needs.emplace(node, std::move(flags));
  }

  GradModeScope mode(create_graph);
  grads.emplace(output.key(), Tensor::ones(output.shape()));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (!relevant.contains(node)) continue;
    auto found = grads.find(node->output);
    if (found == grads.end()) continue;
    Tensor grad_out = found->second;
    if (!targets.contains(node->output)) grads.erase(found);

    const auto& flags = needs.at(node);
    std::vector<Tensor> input_grads = node->backward(grad_out, flags);
    for (std::size_t i = 0; i < node->inputs.size(); ++i) {
      if (!flags[i]) continue;
      if (!input_grads[i].defined()) continue;
      accumulate(grads, node->inputs[i].key(), input_grads[i]);
    }
  }
  return grads;
}

}  // namespace

std::vector<Tensor> grad(const Tensor& output, std::span<const Tensor> wrt, GradOptions options) {
  std::unordered_set<TensorImpl*> targets;
  for (const auto& t : wrt) {
    if (!t.requires_grad()) throw ContractError("grad target does not require grad");
    targets.insert(t.key());
  }
  auto grads = run_backward(output, targets, options.create_graph);
  std::vector<Tensor> result;
  result.reserve(wrt.size());
  for (const auto& t : wrt) {
    auto it = grads.find(t.key());
    result.push_back(it != grads.end() ? it->second : Tensor::zeros(t.shape()));
  }
  return result;
}

void backward(const Tensor& output) {
  std::unordered_set<TensorImpl*> leaves;
  std::unordered_map<TensorImpl*, Tensor> handles;
  if (output.is_leaf() && output.requires_grad()) {
    leaves.insert(output.key());
    handles.emplace(output.key(), output);
  }
  Graph graph = Graph::trace(output);
  for (Node* node : graph.nodes()) {
    for (const auto& input : node->inputs) {
      if (input.is_leaf() && input.requires_grad() && leaves.insert(input.key()).second) {
        handles.emplace(input.key(), input);
      }
    }
  }
  auto grads = run_backward(output, leaves, false);
  for (auto& [key, g] : grads) {
    auto& leaf = handles.at(key);
    auto& slot = leaf.impl()->grad;
    if (!slot) {
      slot = std::make_shared<TensorImpl>(*g.detach().impl());
    } else {
      for (std::size_t i = 0; i < slot->data.size(); ++i) slot->data[i] += g.data()[i];
    }
  }
}

Tensor input_gradient(const std::function<Tensor(const Tensor&)>& f, const Tensor& x) {
  Tensor point = x;
  if (!point.requires_grad()) point = x.detach().requires_grad_();
  Tensor value = f(point);
  if (value.numel() != 1) {
    throw ContractError("input_gradient requires a scalar-valued map, got shape " + shape_str(value.shape()));
  }
  std::vector<Tensor> wrt{point};
  return grad(value, wrt, {.create_graph = true})[0];
}

}  // namespace thzgan::num
