#include "thzgan/training/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>

#include "thzgan/errors.hpp"
#include "thzgan/metrics/spread.hpp"
#include "thzgan/numerics/autograd.hpp"
#include "thzgan/numerics/ops.hpp"

namespace thzgan::training {

using namespace thzgan::num;
using channel::ChannelSample;

std::string to_string(ConditionPairing pairing) {
  return pairing == ConditionPairing::resample ? "resample" : "paired";
}

ConditionPairing condition_pairing_from_string(const std::string& text) {
  if (text == "resample") return ConditionPairing::resample;
  if (text == "paired") return ConditionPairing::paired;
  throw ConfigError("unknown condition pairing '" + text + "'");
}

void TrainConfig::validate() const {
  if (batch_size == 0 || d_steps_per_g_step == 0 || checkpoint_interval == 0) {
    throw ConfigError("train.batch_size, train.d_steps_per_g_step and train.checkpoint_interval must be positive");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("train.lambda must be >= 0");
  if (!(generator_lr > 0.0) || !(discriminator_lr > 0.0)) throw ConfigError("learning rates must be positive");
  if (!(divergence_threshold > 0.0)) throw ConfigError("train.divergence_threshold must be positive");
}

std::string checkpoint_name(std::uint64_t epoch) {
  char name[32];
  std::snprintf(name, sizeof name, "checkpoint_%06llu.bin", static_cast<unsigned long long>(epoch));
  return name;
}

std::vector<ChannelSample> sample_channels(const model::Generator& generator, const channel::Scaler& scaler,
                                           std::span<const double> distances, Rng& noise) {
  constexpr std::size_t kChunk = 256;
  const std::size_t width = generator.config().flat_width();
  const std::size_t noise_dim = generator.config().noise_dim;
  std::vector<ChannelSample> out;
  out.reserve(distances.size());
  NoGradGuard guard;
  for (std::size_t start = 0; start < distances.size(); start += kChunk) {
    const std::size_t n = std::min(kChunk, distances.size() - start);
    std::vector<double> z(n * noise_dim), c(n);
    for (auto& v : z) v = noise.normal();
    for (std::size_t i = 0; i < n; ++i) c[i] = scaler.to_unit(channel::Feature::distance, distances[start + i]);
    Tensor x = generator.forward(Tensor::from({n, noise_dim}, std::move(z)), Tensor::from({n, 1}, std::move(c)));
    const auto values = x.data();
    for (std::size_t i = 0; i < n; ++i) {
      const auto denorm = channel::denormalize(values.subspan(i * width, width), 0.0, scaler);
      // The condition was clipped into the scaler range; keep the requested distance.
      out.emplace_back(denorm.mpcs(), distances[start + i]);
    }
  }
  return out;
}

Trainer::Trainer(const model::ModelConfig& model, const TrainConfig& config, const channel::Scaler& scaler,
                 std::span<const ChannelSample> train)
    : model_config_(model),
      config_(config),
      scaler_(scaler),
      init_rng_(derive_seed(config.seed, "init")),
      generator_(model, init_rng_),
      discriminator_(model, init_rng_),
      eps_rng_(derive_seed(config.seed, "eps")),
      noise_rng_(derive_seed(config.seed, "noise")),
      condition_rng_(derive_seed(config.seed, "condition")) {
  config_.validate();
  if (model.flat_width() != channel::kFlatWidth) {
    throw ConfigError("model width " + std::to_string(model.flat_width()) + " does not match the channel layout");
  }
  if (train.empty()) throw ConfigError("training split is empty");
  train_.reserve(train.size());
  for (const auto& s : train) train_.push_back(channel::normalize(s, scaler_));
  g_opt_ = config_.generator_optimizer == OptimizerKind::sgd ? OptimizerState::sgd(config_.generator_lr)
                                                             : OptimizerState::adam(config_.generator_lr);
  d_opt_ = config_.discriminator_optimizer == OptimizerKind::sgd ? OptimizerState::sgd(config_.discriminator_lr)
                                                                 : OptimizerState::adam(config_.discriminator_lr);
  progress_.seed = config_.seed;
}

model::Checkpoint Trainer::checkpoint(const std::map<std::string, std::string>& extras) const {
  model::Checkpoint c;
  c.model = model_config_;
  c.scaler = scaler_;
  c.generator = model::snapshot(generator_.params());
  c.discriminator = model::snapshot(discriminator_.params());
  c.generator_optimizer = g_opt_;
  c.discriminator_optimizer = d_opt_;
  c.progress = progress_;
  c.extras = extras;
  c.extras["rng.eps"] = eps_rng_.state();
  c.extras["rng.noise"] = noise_rng_.state();
  c.extras["rng.condition"] = condition_rng_.state();
  return c;
}

void Trainer::resume(const model::Checkpoint& c) {
  if (!(c.model == model_config_)) throw ConfigError("checkpoint model configuration differs from the run config");
  if (c.progress.seed != config_.seed) {
    throw ConfigError("checkpoint seed " + std::to_string(c.progress.seed) + " differs from run seed " +
                      std::to_string(config_.seed));
  }
  if (!(c.scaler == scaler_)) throw ConfigError("checkpoint scaler differs from the dataset scaler");
  model::restore(generator_.params(), c.generator);
  model::restore(discriminator_.params(), c.discriminator);
  g_opt_ = c.generator_optimizer;
  d_opt_ = c.discriminator_optimizer;
  progress_ = c.progress;
  eps_rng_.restore(c.extras.at("rng.eps"));
  noise_rng_.restore(c.extras.at("rng.noise"));
  condition_rng_.restore(c.extras.at("rng.condition"));
}

Tensor Trainer::condition_batch(std::size_t count) {
  std::vector<double> c(count);
  for (auto& v : c) v = train_[condition_rng_.below(train_.size())].condition;
  return Tensor::from({count, 1}, std::move(c));
}

Tensor Trainer::noise_batch(std::size_t count) {
  const std::size_t dim = model_config_.noise_dim;
  std::vector<double> z(count * dim);
  for (auto& v : z) v = noise_rng_.normal();
  return Tensor::from({count, dim}, std::move(z));
}

IterationRecord Trainer::step(std::span<const std::size_t> rows) {
  const std::size_t b = rows.size();
  const std::size_t width = model_config_.flat_width();
  std::vector<double> xr(b * width), cr(b);
  for (std::size_t i = 0; i < b; ++i) {
    const auto& s = train_[rows[i]];
    std::copy(s.features.begin(), s.features.end(), xr.begin() + static_cast<std::ptrdiff_t>(i * width));
    cr[i] = s.condition;
  }
  Tensor x_real = Tensor::from({b, width}, std::move(xr));
  Tensor c_real = Tensor::from({b, 1}, std::move(cr));
  Tensor c_fake = config_.condition_pairing == ConditionPairing::resample ? condition_batch(b) : c_real;
  Tensor z = noise_batch(b);
  Tensor x_fake;
  {
    NoGradGuard guard;
    x_fake = generator_.forward(z, c_fake);
  }

  const auto& D = discriminator_;
  const auto& G = generator_;
  ConditionalMap critic = [&D](const Tensor& x, const Tensor& c) { return D.forward(x, c); };
  ConditionalMap gen = [&G](const Tensor& zz, const Tensor& c) { return G.forward(zz, c); };

  auto d_params = discriminator_.params().tensors();
  IterationRecord record;
  record.iteration = progress_.iteration + 1;
  record.epoch = progress_.epoch + 1;
  CriticStepStats d;
  try {
    d = discriminator_step(x_real, c_real, x_fake, c_fake, critic, d_params, d_opt_, config_.lambda,
                           config_.critic_mode, eps_rng_);
  } catch (const DivergenceError& e) {
    throw DivergenceError(std::string(e.what()) + " at iteration " + std::to_string(record.iteration));
  }
  if (std::abs(d.loss) > config_.divergence_threshold) {
    throw DivergenceError("discriminator objective " + std::to_string(d.loss) + " exceeds " +
                          std::to_string(config_.divergence_threshold) + " at iteration " +
                          std::to_string(record.iteration) + " (critic grad norm " + std::to_string(d.grad_norm) +
                          ")");
  }
  ++progress_.iteration;
  ++progress_.pending_d_steps;
  record.d_loss = d.loss;
  record.penalty = d.penalty;
  record.d_real = d.real_mean;
  record.d_fake = d.fake_mean;
  record.d_grad_norm = d.grad_norm;

  if (progress_.pending_d_steps == config_.d_steps_per_g_step) {
    Tensor zg = noise_batch(b);
    Tensor cg = config_.condition_pairing == ConditionPairing::resample ? condition_batch(b) : c_real;
    auto g_params = generator_.params().tensors();
    const auto g = generator_step(zg, cg, gen, critic, g_params, g_opt_, config_.critic_mode);
    progress_.pending_d_steps = 0;
    ++progress_.generator_steps;
    record.generator_updated = true;
    record.g_loss = g.loss;
    record.g_grad_norm = g.grad_norm;
  }
  return record;
}

EvalRecord Trainer::evaluate(std::span<const ChannelSample> reference) const {
  EvalRecord r;
  r.epoch = progress_.epoch;
  r.iteration = progress_.iteration;
  if (reference.empty()) return r;
  std::vector<double> distances;
  distances.reserve(reference.size());
  for (const auto& s : reference) distances.push_back(s.distance());
  Rng noise(derive_seed(config_.seed, "eval", progress_.epoch));
  const auto generated = sample_channels(generator_, scaler_, distances, noise);
  const double n = static_cast<double>(reference.size());
  for (std::size_t i = 0; i < reference.size(); ++i) {
    r.real_delay_spread += metrics::delay_spread(reference[i]) / n;
    r.gen_delay_spread += metrics::delay_spread(generated[i]) / n;
    r.real_angular_spread += metrics::angular_spread(reference[i]) / n;
    r.gen_angular_spread += metrics::angular_spread(generated[i]) / n;
  }
  return r;
}

void Trainer::run(const TrainOutputs& outputs) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] { return elapsed_offset_ + std::chrono::duration<double>(Clock::now() - start).count(); };

  std::optional<TrainLogWriter> writer;
  if (outputs.out_dir) {
    std::filesystem::create_directories(*outputs.out_dir);
    writer.emplace(*outputs.out_dir, progress_.epoch > 0);
  }
  auto save = [&](const std::string& name) {
    if (outputs.out_dir) model::save_checkpoint(*outputs.out_dir / name, checkpoint(outputs.extras));
  };

  if (config_.epochs == 0 && progress_.epoch == 0) save(checkpoint_name(0));

  std::vector<std::size_t> order(train_.size());
  while (progress_.epoch < config_.epochs) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle(derive_seed(config_.seed, "shuffle", progress_.epoch));
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[shuffle.below(i + 1)]);

    for (std::size_t begin = 0; begin < order.size(); begin += config_.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config_.batch_size);
      IterationRecord record;
      try {
        record = step(std::span<const std::size_t>(order.data() + begin, end - begin));
      } catch (const DivergenceError&) {
        save("diverged.bin");
        if (writer) writer->flush();
        throw;
      }
      record.elapsed_s = elapsed();
      log_.iterations.push_back(record);
      if (writer) writer->iteration(record);
    }
    ++progress_.epoch;

    if (config_.eval_interval > 0 && progress_.epoch % config_.eval_interval == 0 && !outputs.reference.empty()) {
      EvalRecord e = evaluate(outputs.reference);
      e.elapsed_s = elapsed();
      log_.evaluations.push_back(e);
      if (writer) writer->evaluation(e);
      if (!outputs.quiet) {
        std::cerr << "epoch " << e.epoch << ": delay spread gap " << e.delay_gap() << ", angular spread gap "
                  << e.angular_gap() << " (" << e.elapsed_s << " s)\n";
      }
    }
    if (progress_.epoch % config_.checkpoint_interval == 0 || progress_.epoch == config_.epochs) {
      save(checkpoint_name(progress_.epoch));
      if (writer) writer->flush();
    }
  }
  elapsed_offset_ = elapsed();
}

}  // namespace thzgan::training
