#pragma once

#include <cstddef>
#include <vector>

#include "thzgan/numerics/tensor.hpp"

// Differentiable array operations. Binary elementwise ops broadcast with
// right-aligned extents (an extent of 1 stretches). All ops throw ShapeError
// naming the op and operand shapes when the operands do not conform.
namespace thzgan::num {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor neg(const Tensor& x);
Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double offset);
Tensor square(const Tensor& x);
Tensor sqrt(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope);
Tensor sigmoid(const Tensor& x);

// Full reductions to a one-element tensor of shape (1).
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// Sums `x` down to a broadcast-compatible `shape`; expand is its adjoint.
Tensor sum_to(const Tensor& x, const Shape& shape);
Tensor expand(const Tensor& x, const Shape& shape);

Tensor reshape(const Tensor& x, Shape shape);
// Swaps the last two axes.
Tensor transpose(const Tensor& x);
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end);

/// Matrix product over the last two axes. Rank-3 operands are batches; a
/// rank-2 operand is shared across the other operand's batch.
Tensor matmul(const Tensor& a, const Tensor& b, bool transpose_a = false, bool transpose_b = false);

// Row-wise ops act on the last axis.
Tensor softmax_rows(const Tensor& x);
Tensor mean_rows(const Tensor& x);
Tensor layer_norm_rows(const Tensor& x, double eps);
// Euclidean norm of each row, keeping the reduced axis as extent 1.
Tensor norm_l2(const Tensor& x);

}  // namespace thzgan::num
