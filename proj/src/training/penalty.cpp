#include "thzgan/training/penalty.hpp"

#include <cmath>

#include "thzgan/errors.hpp"
#include "thzgan/numerics/autograd.hpp"
#include "thzgan/numerics/ops.hpp"

namespace thzgan::training {

using namespace thzgan::num;

std::string to_string(CriticMode mode) { return mode == CriticMode::paper ? "paper" : "wgan"; }

CriticMode critic_mode_from_string(const std::string& text) {
  if (text == "paper") return CriticMode::paper;
  if (text == "wgan") return CriticMode::wgan;
  throw ConfigError("unknown critic mode '" + text + "'");
}

Tensor gradient_penalty(const Tensor& x_real, const Tensor& x_fake, const Tensor& c, const ConditionalMap& critic,
                        const Tensor& eps) {
  if (x_real.shape() != x_fake.shape() || x_real.rank() != 2) {
    throw ShapeError("gradient_penalty: batches " + shape_str(x_real.shape()) + " and " + shape_str(x_fake.shape()) +
                     " do not conform");
  }
  if (eps.shape() != Shape{x_real.dim(0), 1}) {
    throw ShapeError("gradient_penalty: eps shape " + shape_str(eps.shape()) + " does not conform");
  }
  Tensor mixed;
  {
    NoGradGuard guard;
    mixed = add(mul(eps, x_real), mul(add_scalar(neg(eps), 1.0), x_fake));
  }
  Tensor point = mixed.detach().requires_grad_();
  Tensor g = input_gradient([&](const Tensor& x) { return sum(critic(x, c)); }, point);
  return mean(square(add_scalar(norm_l2(g), -1.0)));
}

Tensor gradient_penalty(const Tensor& x_real, const Tensor& x_fake, const Tensor& c, const ConditionalMap& critic,
                        Rng& rng) {
  const std::size_t n = x_real.dim(0);
  std::vector<double> eps(n);
  for (auto& e : eps) e = rng.uniform();
  return gradient_penalty(x_real, x_fake, c, critic, Tensor::from({n, 1}, std::move(eps)));
}

Tensor critic_loss(const Tensor& x_real, const Tensor& c_real, const Tensor& x_fake, const Tensor& c_fake,
                   const ConditionalMap& critic, double lambda, CriticMode mode, Rng& eps_rng,
                   CriticStepStats* stats) {
  if (!(lambda >= 0.0)) throw ConfigError("gradient penalty weight must be >= 0");
  Tensor real = mean(critic(x_real, c_real));
  Tensor fake = mean(critic(x_fake, c_fake));
  // paper: -E[D(x)] - E[1 - D(x_fake)] = E[D(x_fake)] - E[D(x)] - 1
  Tensor loss = sub(fake, real);
  if (mode == CriticMode::paper) loss = add_scalar(loss, -1.0);
  Tensor penalty;
  if (lambda > 0.0) {
    penalty = gradient_penalty(x_real, x_fake, c_real, critic, eps_rng);
    loss = add(loss, scale(penalty, lambda));
  }
  if (stats) {
    stats->loss = loss.item();
    stats->penalty = penalty.defined() ? penalty.item() : 0.0;
    stats->real_mean = real.item();
    stats->fake_mean = fake.item();
  }
  return loss;
}

double global_norm(std::span<const Tensor> tensors) {
  double total = 0.0;
  for (const auto& t : tensors) {
    for (double v : t.data()) total += v * v;
  }
  return std::sqrt(total);
}

CriticStepStats discriminator_step(const Tensor& x_real, const Tensor& c_real, const Tensor& x_fake,
                                   const Tensor& c_fake, const ConditionalMap& critic, std::span<Tensor> critic_params,
                                   OptimizerState& optimizer, double lambda, CriticMode mode, Rng& eps_rng) {
  CriticStepStats stats;
  Tensor loss = critic_loss(x_real, c_real, x_fake.detach(), c_fake, critic, lambda, mode, eps_rng, &stats);
  if (!std::isfinite(stats.loss)) {
    throw DivergenceError("discriminator loss is not finite (penalty " + std::to_string(stats.penalty) + ")");
  }
  auto grads = grad(loss, std::span<const Tensor>(critic_params.data(), critic_params.size()));
  stats.grad_norm = global_norm(grads);
  optimizer_step(optimizer, critic_params, grads);
  return stats;
}

GeneratorStepStats generator_step(const Tensor& z, const Tensor& c, const ConditionalMap& generator,
                                  const ConditionalMap& critic, std::span<Tensor> generator_params,
                                  OptimizerState& optimizer, CriticMode mode) {
  Tensor score = mean(critic(generator(z, c), c));
  Tensor loss = mode == CriticMode::paper ? add_scalar(neg(score), 1.0) : neg(score);
  GeneratorStepStats stats;
  stats.loss = loss.item();
  if (!std::isfinite(stats.loss)) throw DivergenceError("generator loss is not finite");
  auto grads = grad(loss, std::span<const Tensor>(generator_params.data(), generator_params.size()));
  stats.grad_norm = global_norm(grads);
  optimizer_step(optimizer, generator_params, grads);
  return stats;
}

}  // namespace thzgan::training
