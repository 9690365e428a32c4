#include "thzgan/numerics/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <utility>

#include "thzgan/errors.hpp"
#include "thzgan/numerics/autograd.hpp"

namespace thzgan::num {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;
using Grads = std::vector<Tensor>;

[[noreturn]] void conformance(std::string_view op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": shapes " + shape_str(a) + " and " + shape_str(b) + " do not conform");
}

Shape broadcast_shape(std::string_view op, const Shape& a, const Shape& b) {
  std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    std::size_t ea = i < a.size() ? a[a.size() - 1 - i] : 1;
    std::size_t eb = i < b.size() ? b[b.size() - 1 - i] : 1;
    if (ea != eb && ea != 1 && eb != 1) conformance(op, a, b);
    out[rank - 1 - i] = std::max(ea, eb);
  }
  return out;
}

// Row-major strides of `s` laid against `out`, zero along stretched axes.
std::vector<std::size_t> aligned_strides(const Shape& s, const Shape& out) {
  std::vector<std::size_t> strides(out.size(), 0);
  std::size_t stride = 1;
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::size_t axis_s = s.size() - 1 - i;
    std::size_t axis_o = out.size() - 1 - i;
    strides[axis_o] = s[axis_s] == 1 ? 0 : stride;
    stride *= s[axis_s];
  }
  return strides;
}

// Visits every flat index of `out` with the matching offsets into two operands.
template <class F>
void broadcast_loop(const Shape& out, const std::vector<std::size_t>& sa, const std::vector<std::size_t>& sb,
                    F&& f) {
  const std::size_t rank = out.size();
  const std::size_t inner = out.back();
  const std::size_t outer = shape_numel(out) / inner;
  const std::size_t ia_step = sa.back();
  const std::size_t ib_step = sb.back();
  std::vector<std::size_t> idx(rank, 0);
  std::size_t oa = 0, ob = 0, o = 0;
  for (std::size_t k = 0; k < outer; ++k) {
    for (std::size_t j = 0; j < inner; ++j) f(o++, oa + j * ia_step, ob + j * ib_step);
    for (std::size_t ax = rank - 1; ax-- > 0;) {
      ++idx[ax];
      oa += sa[ax];
      ob += sb[ax];
      if (idx[ax] < out[ax]) break;
      oa -= sa[ax] * out[ax];
      ob -= sb[ax] * out[ax];
      idx[ax] = 0;
    }
  }
}

bool is_suffix(const Shape& part, const Shape& whole) {
  if (part.size() > whole.size()) return false;
  return std::equal(part.rbegin(), part.rend(), whole.rbegin());
}

// `part` equals `whole` with the last axis collapsed to 1.
bool is_row_reduction(const Shape& part, const Shape& whole) {
  if (part.size() != whole.size() || part.back() != 1) return false;
  return std::equal(part.begin(), part.end() - 1, whole.begin());
}

template <class F>
std::vector<double> broadcast_apply(const Tensor& a, const Tensor& b, const Shape& out, F f) {
  const auto A = a.data();
  const auto B = b.data();
  const std::size_t n = shape_numel(out);
  std::vector<double> res(n);
  if (a.shape() == out && b.shape() == out) {
    for (std::size_t i = 0; i < n; ++i) res[i] = f(A[i], B[i]);
  } else if (a.shape() == out && B.size() == 1) {
    const double s = B[0];
    for (std::size_t i = 0; i < n; ++i) res[i] = f(A[i], s);
  } else if (b.shape() == out && A.size() == 1) {
    const double s = A[0];
    for (std::size_t i = 0; i < n; ++i) res[i] = f(s, B[i]);
  } else if (a.shape() == out && is_suffix(b.shape(), out)) {
    const std::size_t nb = B.size();
    for (std::size_t i = 0; i < n; i += nb)
      for (std::size_t j = 0; j < nb; ++j) res[i + j] = f(A[i + j], B[j]);
  } else if (a.shape() == out && is_row_reduction(b.shape(), out)) {
    const std::size_t w = out.back();
    for (std::size_t r = 0; r < B.size(); ++r)
      for (std::size_t j = 0; j < w; ++j) res[r * w + j] = f(A[r * w + j], B[r]);
  } else {
    broadcast_loop(out, aligned_strides(a.shape(), out), aligned_strides(b.shape(), out),
                   [&](std::size_t o, std::size_t ia, std::size_t ib) { res[o] = f(A[ia], B[ib]); });
  }
  return res;
}

template <class F>
Tensor map_unary(const Tensor& x, F f) {
  const auto X = x.data();
  std::vector<double> res(X.size());
  for (std::size_t i = 0; i < X.size(); ++i) res[i] = f(X[i]);
  return Tensor::from(x.shape(), std::move(res));
}

Tensor lock_output(const std::weak_ptr<TensorImpl>& ref) {
  auto impl = ref.lock();
  if (!impl) throw ContractError("operation output released before backward");
  return Tensor(std::move(impl));
}

Shape row_shape(const Shape& s) {
  Shape r = s;
  r.back() = 1;
  return r;
}

void gemm(const double* a, std::size_t ra, std::size_t ca, bool ta, const double* b, std::size_t rb,
          std::size_t cb, bool tb, double* c, std::size_t m, std::size_t n) {
  const std::size_t depth = ta ? ra : ca;
  // Small products (per-sample attention) run through a plain kernel: Eigen's
  // per-call overhead dominates at these sizes, and for the tiniest ones its
  // coefficient-wise path sums in an address-dependent order.
  if (m * n * depth <= 65536) {
    auto A = [&](std::size_t i, std::size_t k) { return ta ? a[k * ca + i] : a[i * ca + k]; };
    // Row-major B rows, so the inner loop below runs over contiguous memory.
    thread_local std::vector<double> scratch;
    const double* bk = b;
    std::size_t stride = cb;
    if (tb) {
      scratch.resize(depth * n);
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < depth; ++k) scratch[k * n + j] = b[j * cb + k];
      bk = scratch.data();
      stride = n;
    }
    for (std::size_t i = 0; i < m; ++i) {
      double* crow = c + i * n;
      std::fill(crow, crow + n, 0.0);
      for (std::size_t k = 0; k < depth; ++k) {
        const double aik = A(i, k);
        const double* brow = bk + k * stride;
        for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
      }
    }
    return;
  }
  using Index = Eigen::Index;
  ConstMap A(a, static_cast<Index>(ra), static_cast<Index>(ca));
  ConstMap B(b, static_cast<Index>(rb), static_cast<Index>(cb));
  MutMap C(c, static_cast<Index>(m), static_cast<Index>(n));
  if (!ta && !tb) C.noalias() = A * B;
  else if (ta && !tb) C.noalias() = A.transpose() * B;
  else if (!ta && tb) C.noalias() = A * B.transpose();
  else C.noalias() = A.transpose() * B.transpose();
}

}  // namespace

// ---------------------------------------------------------------- elementwise

Tensor add(const Tensor& a, const Tensor& b) {
  Shape shape = broadcast_shape("add", a.shape(), b.shape());
  Tensor out = Tensor::from(shape, broadcast_apply(a, b, shape, std::plus<>{}));
  record(out, "add", {a, b}, [sa = a.shape(), sb = b.shape()](const Tensor& g, const std::vector<bool>& needs) {
    return Grads{needs[0] ? sum_to(g, sa) : Tensor(), needs[1] ? sum_to(g, sb) : Tensor()};
  });
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  Shape shape = broadcast_shape("sub", a.shape(), b.shape());
  Tensor out = Tensor::from(shape, broadcast_apply(a, b, shape, std::minus<>{}));
  record(out, "sub", {a, b}, [sa = a.shape(), sb = b.shape()](const Tensor& g, const std::vector<bool>& needs) {
    return Grads{needs[0] ? sum_to(g, sa) : Tensor(), needs[1] ? sum_to(neg(g), sb) : Tensor()};
  });
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  Shape shape = broadcast_shape("mul", a.shape(), b.shape());
  Tensor out = Tensor::from(shape, broadcast_apply(a, b, shape, std::multiplies<>{}));
  record(out, "mul", {a, b}, [a, b](const Tensor& g, const std::vector<bool>& needs) {
    return Grads{needs[0] ? sum_to(mul(g, b), a.shape()) : Tensor(),
                 needs[1] ? sum_to(mul(g, a), b.shape()) : Tensor()};
  });
  return out;
}

Tensor div(const Tensor& a, const Tensor& b) {
  Shape shape = broadcast_shape("div", a.shape(), b.shape());
  Tensor out = Tensor::from(shape, broadcast_apply(a, b, shape, std::divides<>{}));
  record(out, "div", {a, b}, [a, b](const Tensor& g, const std::vector<bool>& needs) {
    Tensor ga, gb;
    if (needs[0]) ga = sum_to(div(g, b), a.shape());
    if (needs[1]) gb = sum_to(neg(mul(g, div(a, square(b)))), b.shape());
    return Grads{ga, gb};
  });
  return out;
}

Tensor neg(const Tensor& x) {
  Tensor out = map_unary(x, [](double v) { return -v; });
  record(out, "neg", {x}, [](const Tensor& g, const std::vector<bool>&) { return Grads{neg(g)}; });
  return out;
}

Tensor scale(const Tensor& x, double factor) {
  Tensor out = map_unary(x, [factor](double v) { return v * factor; });
  record(out, "scale", {x},
         [factor](const Tensor& g, const std::vector<bool>&) { return Grads{scale(g, factor)}; });
  return out;
}

Tensor add_scalar(const Tensor& x, double offset) {
  Tensor out = map_unary(x, [offset](double v) { return v + offset; });
  record(out, "add_scalar", {x}, [](const Tensor& g, const std::vector<bool>&) { return Grads{g}; });
  return out;
}

Tensor square(const Tensor& x) {
  Tensor out = map_unary(x, [](double v) { return v * v; });
  record(out, "square", {x},
         [x](const Tensor& g, const std::vector<bool>&) { return Grads{mul(g, scale(x, 2.0))}; });
  return out;
}

Tensor sqrt(const Tensor& x) {
  Tensor out = map_unary(x, [](double v) { return std::sqrt(v); });
  record(out, "sqrt", {x}, [ref = std::weak_ptr<TensorImpl>(out.impl())](const Tensor& g, const std::vector<bool>&) {
    return Grads{div(g, scale(lock_output(ref), 2.0))};
  });
  return out;
}

Tensor exp(const Tensor& x) {
  Tensor out = map_unary(x, [](double v) { return std::exp(v); });
  record(out, "exp", {x}, [ref = std::weak_ptr<TensorImpl>(out.impl())](const Tensor& g, const std::vector<bool>&) {
    return Grads{mul(g, lock_output(ref))};
  });
  return out;
}

Tensor relu(const Tensor& x) {
  Tensor out = map_unary(x, [](double v) { return v > 0.0 ? v : 0.0; });
  record(out, "relu", {x}, [x](const Tensor& g, const std::vector<bool>&) {
    Tensor mask = map_unary(x, [](double v) { return v > 0.0 ? 1.0 : 0.0; });
    return Grads{mul(g, mask)};
  });
  return out;
}

Tensor leaky_relu(const Tensor& x, double slope) {
  Tensor out = map_unary(x, [slope](double v) { return v >= 0.0 ? v : slope * v; });
  record(out, "leaky_relu", {x}, [x, slope](const Tensor& g, const std::vector<bool>&) {
    Tensor mask = map_unary(x, [slope](double v) { return v >= 0.0 ? 1.0 : slope; });
    return Grads{mul(g, mask)};
  });
  return out;
}

Tensor sigmoid(const Tensor& x) {
  Tensor out = map_unary(x, [](double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
  record(out, "sigmoid", {x}, [ref = std::weak_ptr<TensorImpl>(out.impl())](const Tensor& g, const std::vector<bool>&) {
    Tensor y = lock_output(ref);
    return Grads{mul(g, mul(y, add_scalar(neg(y), 1.0)))};
  });
  return out;
}

// ----------------------------------------------------------------- reductions

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  Tensor out = Tensor::scalar(total);
  record(out, "sum", {x}, [shape = x.shape()](const Tensor& g, const std::vector<bool>&) {
    return Grads{expand(g, shape)};
  });
  return out;
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.numel())); }

Tensor sum_to(const Tensor& x, const Shape& shape) {
  if (x.shape() == shape) return x;
  if (broadcast_shape("sum_to", shape, x.shape()) != x.shape()) conformance("sum_to", x.shape(), shape);
  const auto X = x.data();
  std::vector<double> res(shape_numel(shape), 0.0);
  if (res.size() == 1) {
    double total = 0.0;
    for (double v : X) total += v;
    res[0] = total;
  } else if (is_suffix(shape, x.shape())) {
    const std::size_t nb = res.size();
    for (std::size_t i = 0; i < X.size(); i += nb)
      for (std::size_t j = 0; j < nb; ++j) res[j] += X[i + j];
  } else if (is_row_reduction(shape, x.shape())) {
    const std::size_t w = x.shape().back();
    for (std::size_t r = 0; r < res.size(); ++r) {
      double total = 0.0;
      for (std::size_t j = 0; j < w; ++j) total += X[r * w + j];
      res[r] = total;
    }
  } else {
    const auto& out = x.shape();
    broadcast_loop(out, aligned_strides(out, out), aligned_strides(shape, out),
                   [&](std::size_t, std::size_t ix, std::size_t it) { res[it] += X[ix]; });
  }
  Tensor out = Tensor::from(shape, std::move(res));
  record(out, "sum_to", {x}, [src = x.shape()](const Tensor& g, const std::vector<bool>&) {
    return Grads{expand(g, src)};
  });
  return out;
}

Tensor expand(const Tensor& x, const Shape& shape) {
  if (x.shape() == shape) return x;
  if (broadcast_shape("expand", x.shape(), shape) != shape) conformance("expand", x.shape(), shape);
  const auto X = x.data();
  std::vector<double> res(shape_numel(shape));
  if (X.size() == 1) {
    std::fill(res.begin(), res.end(), X[0]);
  } else if (is_suffix(x.shape(), shape)) {
    const std::size_t nb = X.size();
    for (std::size_t i = 0; i < res.size(); i += nb) std::copy(X.begin(), X.end(), res.begin() + i);
  } else if (is_row_reduction(x.shape(), shape)) {
    const std::size_t w = shape.back();
    for (std::size_t r = 0; r < X.size(); ++r) std::fill_n(res.begin() + r * w, w, X[r]);
  } else {
    broadcast_loop(shape, aligned_strides(x.shape(), shape), aligned_strides(shape, shape),
                   [&](std::size_t o, std::size_t ix, std::size_t) { res[o] = X[ix]; });
  }
  Tensor out = Tensor::from(shape, std::move(res));
  record(out, "expand", {x}, [src = x.shape()](const Tensor& g, const std::vector<bool>&) {
    return Grads{sum_to(g, src)};
  });
  return out;
}

// ---------------------------------------------------------------------- shape

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) conformance("reshape", x.shape(), shape);
  Tensor out = Tensor::from(std::move(shape), std::vector<double>(x.data().begin(), x.data().end()));
  record(out, "reshape", {x}, [src = x.shape()](const Tensor& g, const std::vector<bool>&) {
    return Grads{reshape(g, src)};
  });
  return out;
}

Tensor transpose(const Tensor& x) {
  if (x.rank() < 2) throw ShapeError("transpose: needs rank >= 2, got " + shape_str(x.shape()));
  const std::size_t rows = x.shape()[x.rank() - 2];
  const std::size_t cols = x.shape().back();
  const std::size_t batch = x.numel() / (rows * cols);
  Shape shape = x.shape();
  std::swap(shape[shape.size() - 2], shape[shape.size() - 1]);
  const auto X = x.data();
  std::vector<double> res(X.size());
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t off = b * rows * cols;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) res[off + c * rows + r] = X[off + r * cols + c];
  }
  Tensor out = Tensor::from(std::move(shape), std::move(res));
  record(out, "transpose", {x}, [](const Tensor& g, const std::vector<bool>&) { return Grads{transpose(g)}; });
  return out;
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no operands");
  const Shape& first = parts.front().shape();
  if (axis >= first.size()) throw ShapeError("concat: axis out of range for " + shape_str(first));
  Shape shape = first;
  shape[axis] = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != first.size()) conformance("concat", first, s);
    for (std::size_t i = 0; i < s.size(); ++i)
      if (i != axis && s[i] != first[i]) conformance("concat", first, s);
    shape[axis] += s[axis];
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t out_row = shape[axis] * inner;
  std::vector<double> res(shape_numel(shape));
  std::size_t col = 0;
  std::vector<std::size_t> extents;
  for (const auto& p : parts) {
    const auto P = p.data();
    const std::size_t w = p.shape()[axis] * inner;
    for (std::size_t o = 0; o < outer; ++o) std::copy_n(P.begin() + o * w, w, res.begin() + o * out_row + col);
    col += w;
    extents.push_back(p.shape()[axis]);
  }
  Tensor out = Tensor::from(std::move(shape), std::move(res));
  record(out, "concat", parts, [axis, extents](const Tensor& g, const std::vector<bool>& needs) {
    Grads grads(extents.size());
    std::size_t begin = 0;
    for (std::size_t i = 0; i < extents.size(); ++i) {
      if (needs[i]) grads[i] = slice(g, axis, begin, begin + extents[i]);
      begin += extents[i];
    }
    return grads;
  });
  return out;
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end) {
  const Shape& src = x.shape();
  if (axis >= src.size() || begin >= end || end > src[axis]) {
    throw ShapeError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) + ") on axis " +
                     std::to_string(axis) + " invalid for " + shape_str(src));
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= src[i];
  for (std::size_t i = axis + 1; i < src.size(); ++i) inner *= src[i];
  Shape shape = src;
  shape[axis] = end - begin;
  const std::size_t w = shape[axis] * inner;
  const std::size_t src_row = src[axis] * inner;
  const auto X = x.data();
  std::vector<double> res(outer * w);
  for (std::size_t o = 0; o < outer; ++o)
    std::copy_n(X.begin() + o * src_row + begin * inner, w, res.begin() + o * w);
  Tensor out = Tensor::from(std::move(shape), std::move(res));
  record(out, "slice", {x}, [src, axis, begin, end](const Tensor& g, const std::vector<bool>&) {
    std::vector<Tensor> pieces;
    if (begin > 0) {
      Shape s = src;
      s[axis] = begin;
      pieces.push_back(Tensor::zeros(s));
    }
    pieces.push_back(g);
    if (end < src[axis]) {
      Shape s = src;
      s[axis] = src[axis] - end;
      pieces.push_back(Tensor::zeros(s));
    }
    return Grads{pieces.size() == 1 ? g : concat(pieces, axis)};
  });
  return out;
}

// --------------------------------------------------------------------- matmul

Tensor matmul(const Tensor& a, const Tensor& b, bool transpose_a, bool transpose_b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() < 2 || sa.size() > 3 || sb.size() < 2 || sb.size() > 3) conformance("matmul", sa, sb);
  const bool batched_a = sa.size() == 3;
  const bool batched_b = sb.size() == 3;
  const std::size_t ra = sa[sa.size() - 2], ca = sa.back();
  const std::size_t rb = sb[sb.size() - 2], cb = sb.back();
  const std::size_t m = transpose_a ? ca : ra;
  const std::size_t k = transpose_a ? ra : ca;
  const std::size_t kb = transpose_b ? cb : rb;
  const std::size_t n = transpose_b ? rb : cb;
  if (k != kb) conformance("matmul", sa, sb);
  if (batched_a && batched_b && sa[0] != sb[0]) conformance("matmul", sa, sb);
  const std::size_t batch = batched_a ? sa[0] : (batched_b ? sb[0] : 1);
  const bool batched = batched_a || batched_b;

  Shape shape = batched ? Shape{batch, m, n} : Shape{m, n};
  std::vector<double> res(batch * m * n);
  const double* A = a.data().data();
  const double* B = b.data().data();
  if (batched_a && !batched_b && !transpose_a) {
    // Shared right operand: one GEMM over the stacked rows.
    gemm(A, batch * ra, ca, false, B, rb, cb, transpose_b, res.data(), batch * m, n);
  } else {
    for (std::size_t i = 0; i < batch; ++i) {
      gemm(A + (batched_a ? i * ra * ca : 0), ra, ca, transpose_a, B + (batched_b ? i * rb * cb : 0), rb, cb,
           transpose_b, res.data() + i * m * n, m, n);
    }
  }
  Tensor out = Tensor::from(std::move(shape), std::move(res));
  record(out, "matmul", {a, b}, [a, b, transpose_a, transpose_b](const Tensor& g, const std::vector<bool>& needs) {
    const bool ta = transpose_a, tb = transpose_b;
    Tensor ga, gb;
    if (needs[0]) {
      if (!ta && !tb) ga = matmul(g, b, false, true);
      else if (!ta && tb) ga = matmul(g, b, false, false);
      else if (ta && !tb) ga = matmul(b, g, false, true);
      else ga = matmul(b, g, true, true);
      ga = sum_to(ga, a.shape());
    }
    if (needs[1]) {
      if (a.rank() == 3 && b.rank() == 2 && !ta) {
        const Shape& s = a.shape();
        Tensor a2 = reshape(a, {s[0] * s[1], s[2]});
        Tensor g2 = reshape(g, {g.shape()[0] * g.shape()[1], g.shape()[2]});
        gb = tb ? matmul(g2, a2, true, false) : matmul(a2, g2, true, false);
      } else {
        if (!ta && !tb) gb = matmul(a, g, true, false);
        else if (!ta && tb) gb = matmul(g, a, true, false);
        else if (ta && !tb) gb = matmul(a, g, false, false);
        else gb = matmul(g, a, true, true);
        gb = sum_to(gb, b.shape());
      }
    }
    return Grads{ga, gb};
  });
  return out;
}

// ------------------------------------------------------------------- row-wise

Tensor softmax_rows(const Tensor& x) {
  const std::size_t w = x.shape().back();
  const auto X = x.data();
  std::vector<double> res(X.size());
  for (std::size_t r = 0; r < X.size() / w; ++r) {
    const double* row = X.data() + r * w;
    double* dst = res.data() + r * w;
    const double top = *std::max_element(row, row + w);
    double total = 0.0;
    for (std::size_t j = 0; j < w; ++j) total += (dst[j] = std::exp(row[j] - top));
    for (std::size_t j = 0; j < w; ++j) dst[j] /= total;
  }
  Tensor out = Tensor::from(x.shape(), std::move(res));
  record(out, "softmax_rows", {x},
         [ref = std::weak_ptr<TensorImpl>(out.impl())](const Tensor& g, const std::vector<bool>&) {
           Tensor y = lock_output(ref);
           Tensor dot = sum_to(mul(g, y), row_shape(y.shape()));
           return Grads{mul(y, sub(g, dot))};
         });
  return out;
}

Tensor mean_rows(const Tensor& x) {
  return scale(sum_to(x, row_shape(x.shape())), 1.0 / static_cast<double>(x.shape().back()));
}

Tensor layer_norm_rows(const Tensor& x, double eps) {
  Tensor centered = sub(x, mean_rows(x));
  Tensor variance = mean_rows(square(centered));
  return div(centered, sqrt(add_scalar(variance, eps)));
}

Tensor norm_l2(const Tensor& x) {
  const std::size_t w = x.shape().back();
  const auto X = x.data();
  std::vector<double> res(X.size() / w);
  for (std::size_t r = 0; r < res.size(); ++r) {
    double total = 0.0;
    for (std::size_t j = 0; j < w; ++j) total += X[r * w + j] * X[r * w + j];
    res[r] = std::sqrt(total);
  }
  Tensor out = Tensor::from(row_shape(x.shape()), std::move(res));
  record(out, "norm_l2", {x}, [x, ref = std::weak_ptr<TensorImpl>(out.impl())](const Tensor& g, const std::vector<bool>&) {
    Tensor y = lock_output(ref);
    // Zero-norm rows take the zero subgradient (x is zero there too).
    Tensor guard = map_unary(y, [](double v) { return v == 0.0 ? 1.0 : 0.0; });
    return Grads{mul(x, div(g, add(y, guard)))};
  });
  return out;
}

}  // namespace thzgan::num
