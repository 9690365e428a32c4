#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "thzgan/model/layers.hpp"
#include "thzgan/numerics/random.hpp"

namespace thzgan::model {

struct EncoderConfig {
  std::size_t num_layers = 6;
  std::size_t num_heads = 4;
  std::size_t model_dim = 128;
  std::size_t key_dim = 32;
  std::size_t value_dim = 32;
  std::size_t seq_len = 15;
  std::size_t mpc_dim = 4;
  std::size_t ffn_dim = 128;

  void validate() const;  // ConfigError on zero extents
  bool operator==(const EncoderConfig&) const = default;
};

enum class GeneratorOutput { sigmoid, linear_clamped };
enum class DiscriminatorOutput { sigmoid, linear };

std::string to_string(GeneratorOutput v);
std::string to_string(DiscriminatorOutput v);
GeneratorOutput generator_output_from_string(const std::string& text);
DiscriminatorOutput discriminator_output_from_string(const std::string& text);

struct ModelConfig {
  EncoderConfig encoder;
  std::size_t noise_dim = 32;
  std::size_t head_hidden = 240;  // generator output head
  double pe_init_std = 0.02;
  GeneratorOutput generator_output = GeneratorOutput::sigmoid;
  DiscriminatorOutput discriminator_output = DiscriminatorOutput::sigmoid;

  std::size_t flat_width() const { return encoder.seq_len * encoder.mpc_dim; }
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

/// Named parameter list in a fixed order. Entries share storage with the
/// network that owns them, so updating a tensor here updates the network.
class ParamSet {
 public:
  void add(std::string name, Tensor tensor);
  const std::vector<std::pair<std::string, Tensor>>& entries() const noexcept { return entries_; }
  std::vector<Tensor> tensors() const;
  const Tensor& at(const std::string& name) const;
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t parameter_count() const;

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

struct EmbeddingParams {
  Tensor in_w, in_b;    // (input width) x L*d_m
  Tensor mpc_w, mpc_b;  // d_m x d_x
  Tensor pe;            // L x d_x
};

/// Shared trunk: dense + LeakyReLU to L*d_m, reshape to L x d_m, per-row
/// dense to d_x, add PE, then the encoder stack. Returns (B, L, d_x).
Tensor encode(const Tensor& input, const EmbeddingParams& embed, const std::vector<EncoderLayerParams>& layers,
              const EncoderConfig& config, std::vector<Tensor>* attention = nullptr);

class Generator {
 public:
  Generator(const ModelConfig& config, num::Rng& init);

  // z: (B, noise_dim), c: (B, 1) -> (B, L*d_m).
  Tensor forward(const Tensor& z, const Tensor& c) const;

  const ModelConfig& config() const noexcept { return config_; }
  const ParamSet& params() const noexcept { return params_; }
  const EmbeddingParams& embedding() const noexcept { return embed_; }
  const std::vector<EncoderLayerParams>& layers() const noexcept { return layers_; }

 private:
  ModelConfig config_;
  EmbeddingParams embed_;
  std::vector<EncoderLayerParams> layers_;
  Tensor head_w1_, head_b1_, head_w2_, head_b2_;
  ParamSet params_;
};

class Discriminator {
 public:
  Discriminator(const ModelConfig& config, num::Rng& init);

  // x: (B, L*d_m), c: (B, 1) -> (B, 1).
  Tensor forward(const Tensor& x, const Tensor& c) const;

  const ModelConfig& config() const noexcept { return config_; }
  const ParamSet& params() const noexcept { return params_; }
  const EmbeddingParams& embedding() const noexcept { return embed_; }
  const std::vector<EncoderLayerParams>& layers() const noexcept { return layers_; }

 private:
  ModelConfig config_;
  EmbeddingParams embed_;
  std::vector<EncoderLayerParams> layers_;
  Tensor head_w1_, head_b1_, head_w2_, head_b2_;
  ParamSet params_;
};

}  // namespace thzgan::model
