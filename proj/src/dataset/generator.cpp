#include "thzgan/dataset/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "thzgan/errors.hpp"

namespace thzgan::dataset {

using channel::ChannelSample;
using channel::Mpc;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_degrees(double angle) {
  double wrapped = std::fmod(angle + 180.0, 360.0);
  if (wrapped < 0.0) wrapped += 360.0;
  wrapped -= 180.0;
  return wrapped >= 180.0 ? -180.0 : wrapped;
}

double draw_phase(num::Rng& rng) {
  const double phase = kTwoPi * rng.uniform();
  return phase < kTwoPi ? phase : 0.0;
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void GeneratorConfig::validate() const {
  if (sample_count < 10) {
    throw ConfigError("dataset.sample_count must be at least 10, got " + std::to_string(sample_count));
  }
  if (!positive_finite(distance_min) || !std::isfinite(distance_max) || !(distance_max > distance_min)) {
    throw ConfigError("dataset distance range must satisfy 0 < min < max");
  }
  if (!positive_finite(carrier_frequency) || !positive_finite(delay_decay) || !positive_finite(angle_scale) ||
      !positive_finite(shadowing_db)) {
    throw ConfigError("dataset scales must be positive and finite");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("dataset.train_fraction must lie in (0, 1)");
  }
}

double free_space_gain(double distance, double carrier_frequency) {
  const double wavelength = kSpeedOfLight / carrier_frequency;
  return wavelength / (4.0 * std::numbers::pi * distance);
}

ChannelSample generate_sample(double distance, const GeneratorConfig& config, num::Rng& rng) {
  if (!(distance >= config.distance_min && distance <= config.distance_max)) {
    throw DomainError("distance " + std::to_string(distance) + " m outside [" + std::to_string(config.distance_min) +
                      ", " + std::to_string(config.distance_max) + "]");
  }
  std::vector<Mpc> mpcs(channel::kNumMpcs);
  Mpc& los = mpcs.front();
  los.delay = distance / kSpeedOfLight;
  los.aoa = 0.0;
  los.gain = free_space_gain(distance, config.carrier_frequency);
  los.phase = draw_phase(rng);

  std::vector<double> excess(channel::kNumMpcs - 1);
  for (auto& e : excess) e = rng.exponential(config.delay_decay);
  std::sort(excess.begin(), excess.end());
  for (std::size_t l = 1; l < channel::kNumMpcs; ++l) {
    Mpc& m = mpcs[l];
    const double ex = excess[l - 1];
    const double shadow_db = config.shadowing_db * rng.normal();
    m.delay = los.delay + ex;
    m.gain = los.gain * std::exp(-ex / config.delay_decay) * std::pow(10.0, shadow_db / 20.0);
    m.aoa = wrap_degrees(rng.laplace(config.angle_scale));
    m.phase = draw_phase(rng);
  }
  return ChannelSample(mpcs, distance);
}

Dataset generate_dataset(const GeneratorConfig& config) {
  config.validate();
  std::vector<ChannelSample> samples;
  samples.reserve(config.sample_count);
  for (std::size_t i = 0; i < config.sample_count; ++i) {
    num::Rng rng(num::derive_seed(config.seed, "sample", i));
    const double distance = rng.uniform(config.distance_min, config.distance_max);
    samples.push_back(generate_sample(distance, config, rng));
  }

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  num::Rng shuffle(num::derive_seed(config.seed, "split"));
  for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[shuffle.below(i + 1)]);

  const auto train_count =
      static_cast<std::size_t>(std::llround(config.train_fraction * static_cast<double>(samples.size())));
  if (train_count == 0 || train_count == samples.size()) throw ConfigError("train/test split is degenerate");

  Dataset out;
  out.train.reserve(train_count);
  out.test.reserve(samples.size() - train_count);
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < train_count ? out.train : out.test).push_back(samples[order[i]]);
  }
  out.scaler = channel::Scaler::fit(out.train);
  return out;
}

}  // namespace thzgan::dataset
