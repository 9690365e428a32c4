#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "thzgan/numerics/tensor.hpp"

namespace thzgan::num {

enum class OptimizerKind { sgd, adam };

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(const std::string& name);

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::sgd;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  // Adam moments, one array per parameter; empty until the first update.
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  static OptimizerState sgd(double learning_rate);
  static OptimizerState adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);
};

/// Applies one update in place to the leaf tensors `params`.
///   sgd:  p <- p - lr * g
///   adam: bias-corrected first/second moments, p <- p - lr * m_hat / (sqrt(v_hat) + eps)
void optimizer_step(OptimizerState& state, std::span<Tensor> params, std::span<const Tensor> grads);

}  // namespace thzgan::num
