#pragma once

// Plain-loop re-evaluation of the encoder building blocks. Matrices are
// row-major std::vector<double>; parameters are read from the tensors'
// storage and nothing else from the library is used.

#include <cmath>
#include <vector>

#include "thzgan/model/layers.hpp"

namespace thzgan::testing {

using Mat = std::vector<double>;

inline Mat values_of(const num::Tensor& t) { return Mat(t.data().begin(), t.data().end()); }

inline Mat mat_mul(const Mat& a, const Mat& b, std::size_t n, std::size_t k, std::size_t m) {
  Mat c(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < k; ++t) s += a[i * k + t] * b[t * m + j];
      c[i * m + j] = s;
    }
  return c;
}

inline Mat naive_attention(const Mat& q, const Mat& k, const Mat& v, std::size_t len, std::size_t dk,
                           std::size_t dv) {
  Mat out(len * dv, 0.0);
  for (std::size_t i = 0; i < len; ++i) {
    std::vector<double> logits(len);
    double top = -1e300;
    for (std::size_t j = 0; j < len; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < dk; ++t) s += q[i * dk + t] * k[j * dk + t];
      logits[j] = s / std::sqrt(static_cast<double>(dk));
      top = std::max(top, logits[j]);
    }
    double z = 0.0;
    for (auto& l : logits) {
      l = std::exp(l - top);
      z += l;
    }
    for (std::size_t j = 0; j < len; ++j)
      for (std::size_t t = 0; t < dv; ++t) out[i * dv + t] += logits[j] / z * v[j * dv + t];
  }
  return out;
}

inline Mat naive_multi_head(const Mat& x, const model::EncoderLayerParams& p, std::size_t len, std::size_t dx) {
  const std::size_t h = p.heads.size();
  const std::size_t dv = p.heads[0].wv.dim(1);
  Mat concat(len * h * dv, 0.0);
  for (std::size_t head = 0; head < h; ++head) {
    const std::size_t dk = p.heads[head].wq.dim(1);
    Mat q = mat_mul(x, values_of(p.heads[head].wq), len, dx, dk);
    Mat k = mat_mul(x, values_of(p.heads[head].wk), len, dx, dk);
    Mat v = mat_mul(x, values_of(p.heads[head].wv), len, dx, dv);
    Mat a = naive_attention(q, k, v, len, dk, dv);
    for (std::size_t i = 0; i < len; ++i)
      for (std::size_t t = 0; t < dv; ++t) concat[i * h * dv + head * dv + t] = a[i * dv + t];
  }
  return mat_mul(concat, values_of(p.wo), len, h * dv, dx);
}

inline Mat naive_layer_norm(const Mat& x, const num::Tensor& gain, const num::Tensor& bias, std::size_t len,
                            std::size_t d, double eps) {
  Mat out(x.size());
  for (std::size_t i = 0; i < len; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += x[i * d + j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (x[i * d + j] - mu) * (x[i * d + j] - mu);
    var /= static_cast<double>(d);
    for (std::size_t j = 0; j < d; ++j)
      out[i * d + j] = (x[i * d + j] - mu) / std::sqrt(var + eps) * gain.data()[j] + bias.data()[j];
  }
  return out;
}

inline Mat naive_encoder_layer(const Mat& x, const model::EncoderLayerParams& p, std::size_t len, std::size_t dx) {
  Mat mh = naive_multi_head(x, p, len, dx);
  Mat r1(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r1[i] = x[i] + mh[i];
  Mat y = naive_layer_norm(r1, p.ln1_gain, p.ln1_bias, len, dx, model::kLayerNormEps);
  const std::size_t hidden = p.w1.dim(1);
  Mat f = mat_mul(y, values_of(p.w1), len, dx, hidden);
  for (std::size_t i = 0; i < len; ++i)
    for (std::size_t j = 0; j < hidden; ++j) f[i * hidden + j] = std::max(0.0, f[i * hidden + j] + p.b1.data()[j]);
  Mat g = mat_mul(f, values_of(p.w2), len, hidden, dx);
  for (std::size_t i = 0; i < len; ++i)
    for (std::size_t j = 0; j < dx; ++j) g[i * dx + j] += p.b2.data()[j] + y[i * dx + j];
  return naive_layer_norm(g, p.ln2_gain, p.ln2_bias, len, dx, model::kLayerNormEps);
}

}  // namespace thzgan::testing
