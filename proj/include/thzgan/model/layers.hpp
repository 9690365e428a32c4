#pragma once

#include <vector>

#include "thzgan/numerics/tensor.hpp"

namespace thzgan::model {

using num::Tensor;

struct HeadParams {
  Tensor wq;  // d_x x d_k
  Tensor wk;  // d_x x d_k
  Tensor wv;  // d_x x d_v
};

struct EncoderLayerParams {
  std::vector<HeadParams> heads;
  Tensor wo;  // h*d_v x d_x
  Tensor w1, b1, w2, b2;  // FFN, hidden width = d_x
  Tensor ln1_gain, ln1_bias;
  Tensor ln2_gain, ln2_bias;
};

inline constexpr double kLayerNormEps = 1e-5;
inline constexpr double kLeakySlope = 0.2;

/// softmax(Q K^T / sqrt(d_k)) V over the last two axes; rank-3 inputs are
/// batches. When `weights` is given it receives the attention matrix.
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, Tensor* weights = nullptr);

/// Concat of the per-head attention outputs times W^o. `weights`, when given,
/// receives one attention matrix per head.
Tensor multi_head(const Tensor& x, const EncoderLayerParams& p, std::vector<Tensor>* weights = nullptr);

/// Post-norm layer: LN(X + MHA(X)), then LN(Y + FFN(Y)).
Tensor encoder_layer(const Tensor& x, const EncoderLayerParams& p, std::vector<Tensor>* weights = nullptr);

/// x W + b, with b broadcast over the leading axes.
Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b);

Tensor feed_forward(const Tensor& x, const EncoderLayerParams& p);

}  // namespace thzgan::model
