#include "thzgan/numerics/optimizer.hpp"

#include <cmath>

#include "thzgan/errors.hpp"

namespace thzgan::num {

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::sgd ? "sgd" : "adam"; }

OptimizerKind optimizer_kind_from_string(const std::string& name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  throw ConfigError("unknown optimizer '" + name + "'");
}

OptimizerState OptimizerState::sgd(double learning_rate) {
  OptimizerState s;
  s.kind = OptimizerKind::sgd;
  s.learning_rate = learning_rate;
  return s;
}

OptimizerState OptimizerState::adam(double learning_rate, double beta1, double beta2, double epsilon) {
  OptimizerState s;
  s.kind = OptimizerKind::adam;
  s.learning_rate = learning_rate;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.epsilon = epsilon;
  return s;
}

void optimizer_step(OptimizerState& state, std::span<Tensor> params, std::span<const Tensor> grads) {
  if (params.size() != grads.size()) {
    throw ShapeError("optimizer_step: " + std::to_string(params.size()) + " parameters but " +
                     std::to_string(grads.size()) + " gradients");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].shape() != grads[i].shape()) {
      throw ShapeError("optimizer_step: parameter " + std::to_string(i) + " has shape " +
                       shape_str(params[i].shape()) + " but gradient has " + shape_str(grads[i].shape()));
    }
  }
  if (!(state.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");

  ++state.step;
  if (state.kind == OptimizerKind::sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto p = params[i].mutable_data();
      auto g = grads[i].data();
      for (std::size_t j = 0; j < p.size(); ++j) p[j] -= state.learning_rate * g[j];
    }
    return;
  }

  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.numel(), 0.0);
      state.v.emplace_back(p.numel(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw ShapeError("optimizer_step: moment count does not match parameters");
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].mutable_data();
    auto g = grads[i].data();
    auto& m = state.m[i];
    auto& v = state.v[i];
    if (m.size() != p.size()) throw ShapeError("optimizer_step: moment shape does not match parameter " + std::to_string(i));
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      p[j] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

}  // namespace thzgan::num
