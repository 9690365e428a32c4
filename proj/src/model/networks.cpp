#include "thzgan/model/networks.hpp"

#include <cmath>

#include "thzgan/errors.hpp"
#include "thzgan/numerics/ops.hpp"

namespace thzgan::model {

using namespace thzgan::num;

void EncoderConfig::validate() const {
  if (num_layers == 0 || num_heads == 0 || model_dim == 0 || key_dim == 0 || value_dim == 0 || seq_len == 0 ||
      mpc_dim == 0 || ffn_dim == 0) {
    throw ConfigError("encoder dimensions must all be positive");
  }
}

void ModelConfig::validate() const {
  encoder.validate();
  if (noise_dim == 0 || head_hidden == 0) throw ConfigError("model.noise_dim and head width must be positive");
  if (!(pe_init_std >= 0.0) || !std::isfinite(pe_init_std)) throw ConfigError("model.pe_init_std must be >= 0");
}

std::string to_string(GeneratorOutput v) { return v == GeneratorOutput::sigmoid ? "sigmoid" : "linear_clamped"; }
std::string to_string(DiscriminatorOutput v) { return v == DiscriminatorOutput::sigmoid ? "sigmoid" : "linear"; }

GeneratorOutput generator_output_from_string(const std::string& text) {
  if (text == "sigmoid") return GeneratorOutput::sigmoid;
  if (text == "linear_clamped") return GeneratorOutput::linear_clamped;
  throw ConfigError("unknown generator output activation '" + text + "'");
}

DiscriminatorOutput discriminator_output_from_string(const std::string& text) {
  if (text == "sigmoid") return DiscriminatorOutput::sigmoid;
  if (text == "linear") return DiscriminatorOutput::linear;
  throw ConfigError("unknown discriminator output activation '" + text + "'");
}

void ParamSet::add(std::string name, Tensor tensor) {
  for (const auto& [existing, t] : entries_) {
    if (existing == name) throw ContractError("duplicate parameter name " + name);
  }
  tensor.requires_grad_();
  entries_.emplace_back(std::move(name), std::move(tensor));
}

std::vector<Tensor> ParamSet::tensors() const {
  std::vector<Tensor> out;
  out.reserve(entries_.size());
  for (const auto& [name, t] : entries_) out.push_back(t);
  return out;
}

const Tensor& ParamSet::at(const std::string& name) const {
  for (const auto& [n, t] : entries_) {
    if (n == name) return t;
  }
  throw ContractError("no parameter named " + name);
}

std::size_t ParamSet::parameter_count() const {
  std::size_t total = 0;
  for (const auto& [name, t] : entries_) total += t.numel();
  return total;
}

namespace {

Tensor uniform_init(const Shape& shape, std::size_t fan_in, Rng& rng) {
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  std::vector<double> values(shape_numel(shape));
  for (auto& v : values) v = rng.uniform(-bound, bound);
  return Tensor::from(shape, std::move(values));
}

Tensor normal_init(const Shape& shape, double stddev, Rng& rng) {
  std::vector<double> values(shape_numel(shape));
  for (auto& v : values) v = stddev * rng.normal();
  return Tensor::from(shape, std::move(values));
}

// Dense layer weight and bias, registered under `prefix`.
std::pair<Tensor, Tensor> make_dense(ParamSet& set, const std::string& prefix, std::size_t in, std::size_t out,
                                     Rng& rng) {
  Tensor w = uniform_init({in, out}, in, rng);
  Tensor b = uniform_init({out}, in, rng);
  set.add(prefix + ".w", w);
  set.add(prefix + ".b", b);
  return {w, b};
}

EmbeddingParams make_embedding(ParamSet& set, std::size_t input_width, const ModelConfig& config, Rng& rng) {
  const auto& e = config.encoder;
  EmbeddingParams p;
  std::tie(p.in_w, p.in_b) = make_dense(set, "embed.in", input_width, e.seq_len * e.mpc_dim, rng);
  std::tie(p.mpc_w, p.mpc_b) = make_dense(set, "embed.mpc", e.mpc_dim, e.model_dim, rng);
  p.pe = normal_init({e.seq_len, e.model_dim}, config.pe_init_std, rng);
  set.add("embed.pe", p.pe);
  return p;
}

std::vector<EncoderLayerParams> make_layers(ParamSet& set, const EncoderConfig& e, Rng& rng) {
  std::vector<EncoderLayerParams> layers(e.num_layers);
  for (std::size_t l = 0; l < e.num_layers; ++l) {
    auto& p = layers[l];
    const std::string prefix = "layer" + std::to_string(l);
    p.heads.resize(e.num_heads);
    for (std::size_t h = 0; h < e.num_heads; ++h) {
      const std::string hp = prefix + ".head" + std::to_string(h);
      p.heads[h].wq = uniform_init({e.model_dim, e.key_dim}, e.model_dim, rng);
      p.heads[h].wk = uniform_init({e.model_dim, e.key_dim}, e.model_dim, rng);
      p.heads[h].wv = uniform_init({e.model_dim, e.value_dim}, e.model_dim, rng);
      set.add(hp + ".wq", p.heads[h].wq);
      set.add(hp + ".wk", p.heads[h].wk);
      set.add(hp + ".wv", p.heads[h].wv);
    }
    p.wo = uniform_init({e.num_heads * e.value_dim, e.model_dim}, e.num_heads * e.value_dim, rng);
    set.add(prefix + ".wo", p.wo);
    std::tie(p.w1, p.b1) = make_dense(set, prefix + ".ffn1", e.model_dim, e.ffn_dim, rng);
    std::tie(p.w2, p.b2) = make_dense(set, prefix + ".ffn2", e.ffn_dim, e.model_dim, rng);
    p.ln1_gain = Tensor::ones({e.model_dim});
    p.ln1_bias = Tensor::zeros({e.model_dim});
    p.ln2_gain = Tensor::ones({e.model_dim});
    p.ln2_bias = Tensor::zeros({e.model_dim});
    set.add(prefix + ".ln1.gain", p.ln1_gain);
    set.add(prefix + ".ln1.bias", p.ln1_bias);
    set.add(prefix + ".ln2.gain", p.ln2_gain);
    set.add(prefix + ".ln2.bias", p.ln2_bias);
  }
  return layers;
}

void check_batch(const char* who, const Tensor& a, std::size_t a_width, const Tensor& c) {
  if (a.rank() != 2 || a.dim(1) != a_width) {
    throw ShapeError(std::string(who) + ": input shape " + shape_str(a.shape()) + " does not conform to (B, " +
                     std::to_string(a_width) + ")");
  }
  if (c.rank() != 2 || c.dim(1) != 1 || c.dim(0) != a.dim(0)) {
    throw ShapeError(std::string(who) + ": condition shape " + shape_str(c.shape()) + " does not conform to (" +
                     std::to_string(a.dim(0)) + ", 1)");
  }
}

}  // namespace

Tensor encode(const Tensor& input, const EmbeddingParams& embed, const std::vector<EncoderLayerParams>& layers,
              const EncoderConfig& config, std::vector<Tensor>* attention) {
  const std::size_t batch = input.dim(0);
  Tensor h = leaky_relu(dense(input, embed.in_w, embed.in_b), kLeakySlope);
  h = reshape(h, {batch, config.seq_len, config.mpc_dim});
  h = add(dense(h, embed.mpc_w, embed.mpc_b), embed.pe);
  if (attention) attention->clear();
  for (const auto& layer : layers) {
    std::vector<Tensor> weights;
    h = encoder_layer(h, layer, attention ? &weights : nullptr);
    if (attention) attention->insert(attention->end(), weights.begin(), weights.end());
  }
  return h;
}

Generator::Generator(const ModelConfig& config, Rng& init) : config_(config) {
  config_.validate();
  const auto& e = config_.encoder;
  embed_ = make_embedding(params_, config_.noise_dim + 1, config_, init);
  layers_ = make_layers(params_, e, init);
  std::tie(head_w1_, head_b1_) = make_dense(params_, "head.dense1", e.seq_len * e.model_dim, config_.head_hidden, init);
  std::tie(head_w2_, head_b2_) = make_dense(params_, "head.dense2", config_.head_hidden, config_.flat_width(), init);
}

Tensor Generator::forward(const Tensor& z, const Tensor& c) const {
  check_batch("generator", z, config_.noise_dim, c);
  const auto& e = config_.encoder;
  Tensor h = encode(concat({z, c}, 1), embed_, layers_, e);
  h = reshape(h, {z.dim(0), e.seq_len * e.model_dim});
  h = leaky_relu(dense(h, head_w1_, head_b1_), kLeakySlope);
  h = dense(h, head_w2_, head_b2_);
  // linear_clamped leaves the range to the denormalizer, which clamps.
  return config_.generator_output == GeneratorOutput::sigmoid ? sigmoid(h) : h;
}

Discriminator::Discriminator(const ModelConfig& config, Rng& init) : config_(config) {
  config_.validate();
  const auto& e = config_.encoder;
  embed_ = make_embedding(params_, config_.flat_width() + 1, config_, init);
  layers_ = make_layers(params_, e, init);
  std::tie(head_w1_, head_b1_) = make_dense(params_, "head.dense1", e.seq_len * e.model_dim, 1, init);
  std::tie(head_w2_, head_b2_) = make_dense(params_, "head.dense2", 1, 1, init);
}

Tensor Discriminator::forward(const Tensor& x, const Tensor& c) const {
  check_batch("discriminator", x, config_.flat_width(), c);
  const auto& e = config_.encoder;
  Tensor h = encode(concat({x, c}, 1), embed_, layers_, e);
  h = reshape(h, {x.dim(0), e.seq_len * e.model_dim});
  h = dense(dense(h, head_w1_, head_b1_), head_w2_, head_b2_);
  return config_.discriminator_output == DiscriminatorOutput::sigmoid ? sigmoid(h) : h;
}

}  // namespace thzgan::model
