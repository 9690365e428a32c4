#pragma once

#include <functional>
#include <span>

#include "thzgan/numerics/optimizer.hpp"
#include "thzgan/numerics/random.hpp"
#include "thzgan/numerics/tensor.hpp"

namespace thzgan::training {

using num::Tensor;

/// A conditional critic or generator: (input batch, condition batch) -> batch.
using ConditionalMap = std::function<Tensor(const Tensor&, const Tensor&)>;

enum class CriticMode { paper, wgan };

std::string to_string(CriticMode mode);
CriticMode critic_mode_from_string(const std::string& text);

/// mean over the batch of (||grad_x D(x_hat | c)||_2 - 1)^2 at
/// x_hat = eps * x_real + (1 - eps) * x_fake, with one eps per row. The
/// result stays differentiable with respect to D's parameters.
Tensor gradient_penalty(const Tensor& x_real, const Tensor& x_fake, const Tensor& c, const ConditionalMap& critic,
                        const Tensor& eps);

/// Same, drawing eps ~ U[0, 1) per row from `rng`.
Tensor gradient_penalty(const Tensor& x_real, const Tensor& x_fake, const Tensor& c, const ConditionalMap& critic,
                        num::Rng& rng);

struct CriticStepStats {
  double loss = 0.0;
  double penalty = 0.0;
  double real_mean = 0.0;  // mean D(x | c)
  double fake_mean = 0.0;  // mean D(G(z | c) | c)
  double grad_norm = 0.0;
};

struct GeneratorStepStats {
  double loss = 0.0;
  double grad_norm = 0.0;
};

/// Critic objective on fixed batches:
///   paper: -mean D(x_real) - mean(1 - D(x_fake)) + lambda * GP
///   wgan:   mean D(x_fake) - mean D(x_real) + lambda * GP
/// The penalty is evaluated with the real conditions.
Tensor critic_loss(const Tensor& x_real, const Tensor& c_real, const Tensor& x_fake, const Tensor& c_fake,
                   const ConditionalMap& critic, double lambda, CriticMode mode, num::Rng& eps_rng,
                   CriticStepStats* stats = nullptr);

/// One optimizer update of the critic parameters. x_fake is a constant.
CriticStepStats discriminator_step(const Tensor& x_real, const Tensor& c_real, const Tensor& x_fake,
                                   const Tensor& c_fake, const ConditionalMap& critic, std::span<Tensor> critic_params,
                                   num::OptimizerState& optimizer, double lambda, CriticMode mode, num::Rng& eps_rng);

/// One optimizer update of the generator parameters with the critic frozen:
///   paper: mean(1 - D(G(z | c) | c))
///   wgan:  -mean D(G(z | c) | c)
GeneratorStepStats generator_step(const Tensor& z, const Tensor& c, const ConditionalMap& generator,
                                  const ConditionalMap& critic, std::span<Tensor> generator_params,
                                  num::OptimizerState& optimizer, CriticMode mode);

/// Euclidean norm over all entries of all tensors.
double global_norm(std::span<const Tensor> tensors);

}  // namespace thzgan::training
