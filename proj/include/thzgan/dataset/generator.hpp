#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "thzgan/channel/channel.hpp"
#include "thzgan/channel/scaler.hpp"
#include "thzgan/numerics/random.hpp"

namespace thzgan::dataset {

inline constexpr double kSpeedOfLight = 299792458.0;

struct GeneratorConfig {
  std::size_t sample_count = 2000;
  double distance_min = 1.0;      // m
  double distance_max = 30.0;     // m
  double carrier_frequency = 3.0e11;  // Hz
  double delay_decay = 20e-9;     // s, mean NLoS excess delay
  double angle_scale = 35.0;      // deg, Laplacian scale of NLoS AoA
  double shadowing_db = 3.0;      // lognormal shadowing std-dev on NLoS gains
  double train_fraction = 0.8;
  std::uint64_t seed = 1;

  // Throws ConfigError on an invalid combination.
  void validate() const;
};

struct Dataset {
  std::vector<channel::ChannelSample> train;
  std::vector<channel::ChannelSample> test;
  channel::Scaler scaler;
};

/// Free-space LoS amplitude lambda / (4 pi d).
double free_space_gain(double distance, double carrier_frequency);

/// One channel realization at the given distance. The LoS path arrives
/// first at 0 degrees; the 14 NLoS paths follow with exponential excess
/// delays and exponentially decaying, shadowed gains.
channel::ChannelSample generate_sample(double distance, const GeneratorConfig& config, num::Rng& rng);

/// Draws sample_count channels with uniform distances, splits them by a
/// seeded shuffle and fits the scaler on the training part.
Dataset generate_dataset(const GeneratorConfig& config);

}  // namespace thzgan::dataset
