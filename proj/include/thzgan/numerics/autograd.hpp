#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "thzgan/numerics/tensor.hpp"

namespace thzgan::num {

// Returns one gradient per input; entries whose `needs` flag is false may be
// left undefined. The closure is written with differentiable ops, so running
// it while recording extends the graph (used for second-order terms).
using BackwardFn =
    std::function<std::vector<Tensor>(const Tensor& grad_out, const std::vector<bool>& needs)>;

struct Node {
  std::string op;
  std::vector<Tensor> inputs;
  BackwardFn backward;
  TensorImpl* output = nullptr;  // identity only, never dereferenced
};

bool grad_mode_enabled() noexcept;

// Disables graph recording for the enclosing scope.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Attaches a node to `out` when recording is on and any input requires grad.
void record(Tensor& out, std::string op, std::vector<Tensor> inputs, BackwardFn backward);

/// Topologically ordered view of the operations reachable from one output.
/// Inputs precede their consumers; every node appears once.
class Graph {
 public:
  static Graph trace(const Tensor& output);

  const std::vector<Node*>& nodes() const noexcept { return order_; }
  std::size_t size() const noexcept { return order_.size(); }

 private:
  std::vector<Node*> order_;
};

struct GradOptions {
  bool create_graph = false;
};

/// Gradients of a single-element `output` with respect to each tensor in
/// `wrt`. Unreached targets get a zero tensor of matching shape. With
/// create_graph the results carry history and can be differentiated again.
std::vector<Tensor> grad(const Tensor& output, std::span<const Tensor> wrt, GradOptions options = {});

/// Accumulates d(output)/d(leaf) into the .grad of every leaf requiring grad.
void backward(const Tensor& output);

/// Gradient of the scalar map f at x, itself differentiable so that
/// functions of it (a gradient penalty, say) can be back-propagated into
/// whatever parameters f closes over.
Tensor input_gradient(const std::function<Tensor(const Tensor&)>& f, const Tensor& x);

}  // namespace thzgan::num
