#include "thzgan/model/layers.hpp"

#include <cmath>

#include "thzgan/errors.hpp"
#include "thzgan/numerics/ops.hpp"

namespace thzgan::model {

using namespace thzgan::num;

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, Tensor* weights) {
  if (q.rank() != k.rank() || k.rank() != v.rank() || q.rank() < 2) {
    throw ShapeError("attention: ranks of " + shape_str(q.shape()) + ", " + shape_str(k.shape()) + ", " +
                     shape_str(v.shape()) + " do not conform");
  }
  if (q.shape().back() != k.shape().back() || k.dim(k.rank() - 2) != v.dim(v.rank() - 2)) {
    throw ShapeError("attention: shapes " + shape_str(q.shape()) + ", " + shape_str(k.shape()) + ", " +
                     shape_str(v.shape()) + " do not conform");
  }
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(q.shape().back()));
  Tensor a = softmax_rows(scale(matmul(q, k, false, true), inv_scale));
  if (weights) *weights = a;
  return matmul(a, v);
}

Tensor multi_head(const Tensor& x, const EncoderLayerParams& p, std::vector<Tensor>* weights) {
  const std::size_t h = p.heads.size();
  if (h == 0) throw ShapeError("multi_head: no heads");
  if (weights) weights->clear();
  std::vector<Tensor> outputs;
  outputs.reserve(h);
  for (const auto& head : p.heads) {
    Tensor a;
    outputs.push_back(attention(matmul(x, head.wq), matmul(x, head.wk), matmul(x, head.wv), weights ? &a : nullptr));
    if (weights) weights->push_back(a);
  }
  const std::size_t axis = x.rank() - 1;
  Tensor joined = h == 1 ? outputs.front() : concat(outputs, axis);
  return matmul(joined, p.wo);
}

Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b) { return add(matmul(x, w), b); }

Tensor feed_forward(const Tensor& x, const EncoderLayerParams& p) {
  return dense(relu(dense(x, p.w1, p.b1)), p.w2, p.b2);
}

namespace {

Tensor affine_norm(const Tensor& x, const Tensor& gain, const Tensor& bias) {
  return add(mul(layer_norm_rows(x, kLayerNormEps), gain), bias);
}

}  // namespace

Tensor encoder_layer(const Tensor& x, const EncoderLayerParams& p, std::vector<Tensor>* weights) {
  Tensor y = affine_norm(add(x, multi_head(x, p, weights)), p.ln1_gain, p.ln1_bias);
  return affine_norm(add(y, feed_forward(y, p)), p.ln2_gain, p.ln2_bias);
}

}  // namespace thzgan::model
