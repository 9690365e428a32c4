#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thzgan/channel/scaler.hpp"
#include "thzgan/model/checkpoint.hpp"
#include "thzgan/model/networks.hpp"
#include "thzgan/training/penalty.hpp"
#include "thzgan/training/train_log.hpp"

namespace thzgan::training {

enum class ConditionPairing { resample, paired };

std::string to_string(ConditionPairing pairing);
ConditionPairing condition_pairing_from_string(const std::string& text);

struct TrainConfig {
  std::size_t epochs = 300;
  std::size_t batch_size = 64;
  double lambda = 10.0;
  std::size_t d_steps_per_g_step = 3;
  num::OptimizerKind generator_optimizer = num::OptimizerKind::sgd;
  double generator_lr = 1e-4;
  num::OptimizerKind discriminator_optimizer = num::OptimizerKind::adam;
  double discriminator_lr = 1e-4;
  std::uint64_t seed = 1;
  std::size_t checkpoint_interval = 50;  // epochs; the final epoch is always written
  std::size_t eval_interval = 0;         // epochs; 0 disables in-loop evaluation
  CriticMode critic_mode = CriticMode::paper;
  ConditionPairing condition_pairing = ConditionPairing::resample;
  double divergence_threshold = 1e6;

  void validate() const;  // ConfigError
};

/// Generates one channel per distance with z ~ N(0, I) drawn from `noise`.
std::vector<channel::ChannelSample> sample_channels(const model::Generator& generator, const channel::Scaler& scaler,
                                                    std::span<const double> distances, num::Rng& noise);

std::string checkpoint_name(std::uint64_t epoch);

struct TrainOutputs {
  std::optional<std::filesystem::path> out_dir;  // checkpoints and CSV logs
  std::map<std::string, std::string> extras;     // copied into every checkpoint
  std::vector<channel::ChannelSample> reference;  // ground truth for in-loop evaluation
  bool quiet = true;
};

class Trainer {
 public:
  Trainer(const model::ModelConfig& model, const TrainConfig& config, const channel::Scaler& scaler,
          std::span<const channel::ChannelSample> train);

  /// Continues from a checkpoint of the same model configuration.
  void resume(const model::Checkpoint& checkpoint);

  /// Trains until `config.epochs` epochs are complete. Throws DivergenceError
  /// after dumping `diverged.bin` when the critic objective blows up.
  void run(const TrainOutputs& outputs = {});

  model::Checkpoint checkpoint(const std::map<std::string, std::string>& extras = {}) const;

  const model::Generator& generator() const noexcept { return generator_; }
  const model::Discriminator& discriminator() const noexcept { return discriminator_; }
  const model::TrainingProgress& progress() const noexcept { return progress_; }
  const TrainLog& log() const noexcept { return log_; }
  const TrainConfig& config() const noexcept { return config_; }

  /// One critic update on the given minibatch rows, plus a generator update
  /// when the schedule calls for one.
  IterationRecord step(std::span<const std::size_t> rows);

  EvalRecord evaluate(std::span<const channel::ChannelSample> reference) const;

 private:
  num::Tensor condition_batch(std::size_t count);
  num::Tensor noise_batch(std::size_t count);

  model::ModelConfig model_config_;
  TrainConfig config_;
  channel::Scaler scaler_;
  std::vector<channel::NormalizedSample> train_;

  num::Rng init_rng_;
  model::Generator generator_;
  model::Discriminator discriminator_;
  num::OptimizerState g_opt_;
  num::OptimizerState d_opt_;
  num::Rng eps_rng_;
  num::Rng noise_rng_;
  num::Rng condition_rng_;
  model::TrainingProgress progress_;
  TrainLog log_;
  double elapsed_offset_ = 0.0;
};

}  // namespace thzgan::training
