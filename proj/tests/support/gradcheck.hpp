#pragma once

// Finite-difference oracle shared by the unit and acceptance suites. It only
// ever evaluates forward passes, so it stays independent of the reverse-mode
// code it checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "thzgan/numerics/autograd.hpp"
#include "thzgan/numerics/ops.hpp"
#include "thzgan/numerics/random.hpp"

namespace thzgan::testing {

using num::Rng;
using num::Shape;
using num::Tensor;

inline constexpr double kFdStep = 1e-4;

// Relative error with an absolute floor so that vanishing gradients compare
// on an absolute scale of `floor * tolerance`.
inline double relative_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline Tensor random_tensor(const Shape& shape, Rng& rng, double lo = -2.0, double hi = 2.0) {
  std::vector<double> values(num::shape_numel(shape));
  for (auto& v : values) v = rng.uniform(lo, hi);
  return Tensor::from(shape, std::move(values));
}

// Central difference of `value()` with respect to every element of `leaf`.
inline std::vector<double> central_difference(const std::function<double()>& value, Tensor& leaf,
                                              double step = kFdStep) {
  auto data = leaf.mutable_data();
  std::vector<double> result(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double saved = data[i];
    data[i] = saved + step;
    const double up = value();
    data[i] = saved - step;
    const double down = value();
    data[i] = saved;
    result[i] = (up - down) / (2.0 * step);
  }
  return result;
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
};

using OpFn = std::function<Tensor(const std::vector<Tensor>&)>;

/// Compares reverse-mode gradients of <f(inputs), W> (W random) with central
/// differences, over every element of every input.
inline GradCheckResult check_op_gradients(const OpFn& f, std::vector<Tensor> inputs, Rng& rng) {
  for (auto& t : inputs) t.requires_grad_();
  Tensor probe = f(inputs);
  Tensor weights = random_tensor(probe.shape(), rng, -1.0, 1.0);
  Tensor objective = num::sum(num::mul(probe, weights));
  std::vector<Tensor> analytic = num::grad(objective, inputs);

  auto value = [&] {
    num::NoGradGuard guard;
    return num::sum(num::mul(f(inputs), weights)).item();
  };
  GradCheckResult result;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto numeric = central_difference(value, inputs[k]);
    auto exact = analytic[k].data();
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      result.max_rel_error = std::max(result.max_rel_error, relative_error(exact[i], numeric[i]));
      ++result.coordinates;
    }
  }
  return result;
}

struct OpCase {
  std::string name;
  OpFn apply;
  std::function<std::vector<Tensor>(Rng&)> inputs;
};

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) { return lo + rng.below(hi - lo + 1); }

/// One case per forward op kind, with randomized conforming shapes.
inline std::vector<OpCase> forward_op_cases() {
  using V = std::vector<Tensor>;
  std::vector<OpCase> cases;
  auto unary = [&](std::string name, std::function<Tensor(const Tensor&)> op, double lo = -2.0, double hi = 2.0,
                   bool kink_at_zero = false) {
    cases.push_back({std::move(name), [op](const V& in) { return op(in[0]); }, [lo, hi, kink_at_zero](Rng& rng) {
                       Tensor x = random_tensor({pick(rng, 1, 4), pick(rng, 1, 5)}, rng, lo, hi);
                       // A central difference straddling the kink is not a valid oracle.
                       if (kink_at_zero) {
                         for (auto& v : x.mutable_data())
                           while (std::abs(v) < 2.0 * kFdStep) v = rng.uniform(lo, hi);
                       }
                       return V{x};
                     }});
  };
  auto matmul_case = [&](std::string name, bool ta, bool tb, bool batched_a, bool batched_b) {
    cases.push_back({std::move(name), [ta, tb](const V& in) { return num::matmul(in[0], in[1], ta, tb); },
                     [=](Rng& rng) {
                       std::size_t b = pick(rng, 1, 3), m = pick(rng, 1, 4), k = pick(rng, 1, 4), n = pick(rng, 1, 4);
                       Shape sa = ta ? Shape{k, m} : Shape{m, k};
                       Shape sb = tb ? Shape{n, k} : Shape{k, n};
                       if (batched_a) sa.insert(sa.begin(), b);
                       if (batched_b) sb.insert(sb.begin(), b);
                       return V{random_tensor(sa, rng), random_tensor(sb, rng)};
                     }});
  };
  matmul_case("matmul", false, false, false, false);
  matmul_case("matmul_ta", true, false, false, false);
  matmul_case("matmul_tb", false, true, false, false);
  matmul_case("matmul_ta_tb", true, true, false, false);
  matmul_case("matmul_batched_shared_rhs", false, false, true, false);
  matmul_case("matmul_batched_shared_rhs_tb", false, true, true, false);
  matmul_case("matmul_batched_shared_lhs", false, false, false, true);
  matmul_case("matmul_batched", false, true, true, true);
  matmul_case("matmul_batched_ta", true, false, true, true);

  auto binary = [&](std::string name, std::function<Tensor(const Tensor&, const Tensor&)> op, bool positive_rhs) {
    cases.push_back({name, [op](const V& in) { return op(in[0], in[1]); }, [positive_rhs](Rng& rng) {
                       std::size_t b = pick(rng, 1, 3), r = pick(rng, 1, 4), c = pick(rng, 1, 4);
                       Shape sa{b, r, c};
                       // Alternate between same-shape and broadcast right operands.
                       Shape sb;
                       switch (rng.below(4)) {
                         case 0: sb = sa; break;
                         case 1: sb = {c}; break;
                         case 2: sb = {b, r, 1}; break;
                         default: sb = {r, c}; break;
                       }
                       double lo = positive_rhs ? 0.5 : -2.0;
                       return V{random_tensor(sa, rng), random_tensor(sb, rng, lo, 2.0)};
                     }});
  };
  binary("add", num::add, false);
  binary("sub", num::sub, false);
  binary("mul", num::mul, false);
  binary("div", num::div, true);

  cases.push_back({"concat",
                   [](const V& in) { return num::concat({in[0], in[1]}, in[2].data()[0] > 0 ? 1 : 0); },
                   [](Rng& rng) {
                     std::size_t r = pick(rng, 1, 4), c1 = pick(rng, 1, 4), c2 = pick(rng, 1, 4);
                     if (rng.below(2)) return V{random_tensor({r, c1}, rng), random_tensor({r, c2}, rng), Tensor::scalar(1)};
                     return V{random_tensor({c1, r}, rng), random_tensor({c2, r}, rng), Tensor::scalar(-1)};
                   }});
  cases.push_back({"slice", [](const V& in) { return num::slice(in[0], 1, 1, in[0].dim(1)); },
                   [](Rng& rng) { return V{random_tensor({pick(rng, 1, 3), pick(rng, 2, 5)}, rng)}; }});
  cases.push_back({"reshape", [](const V& in) { return num::reshape(in[0], {in[0].numel()}); },
                   [](Rng& rng) { return V{random_tensor({pick(rng, 1, 3), pick(rng, 1, 4)}, rng)}; }});
  cases.push_back({"transpose", [](const V& in) { return num::transpose(in[0]); },
                   [](Rng& rng) { return V{random_tensor({pick(rng, 1, 3), pick(rng, 1, 4), pick(rng, 1, 4)}, rng)}; }});
  cases.push_back({"sum_to", [](const V& in) { return num::sum_to(in[0], {in[0].dim(1)}); },
                   [](Rng& rng) { return V{random_tensor({pick(rng, 1, 4), pick(rng, 1, 4)}, rng)}; }});
  cases.push_back({"expand", [](const V& in) { return num::expand(in[0], {3, in[0].dim(0), 2}); },
                   [](Rng& rng) { return V{random_tensor({pick(rng, 1, 4), 1}, rng)}; }});
  unary("relu", num::relu, -2.0, 2.0, true);
  unary("leaky_relu", [](const Tensor& x) { return num::leaky_relu(x, 0.2); }, -2.0, 2.0, true);
  unary("sigmoid", num::sigmoid);
  unary("softmax_rows", num::softmax_rows);
  unary("layer_norm_rows", [](const Tensor& x) { return num::layer_norm_rows(x, 1e-5); });
  unary("mean_rows", num::mean_rows);
  unary("scale", [](const Tensor& x) { return num::scale(x, -1.7); });
  unary("add_scalar", [](const Tensor& x) { return num::add_scalar(x, 0.3); });
  unary("neg", num::neg);
  unary("sum", num::sum);
  unary("mean", num::mean);
  unary("square", num::square);
  unary("exp", num::exp);
  unary("sqrt", num::sqrt, 0.5, 2.0);
  unary("norm_l2", num::norm_l2);
  return cases;
}

}  // namespace thzgan::testing
