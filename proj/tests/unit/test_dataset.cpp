#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "thzgan/dataset/generator.hpp"
#include "thzgan/errors.hpp"
#include "thzgan/metrics/spread.hpp"

namespace {

using namespace thzgan::dataset;
using thzgan::channel::Feature;
using thzgan::channel::gain_to_db;
using thzgan::num::Rng;

TEST(Generator, LosGeometry) {
  GeneratorConfig cfg;
  Rng rng(1);
  const auto s = generate_sample(3.0, cfg, rng);
  EXPECT_NEAR(s.los().delay, 3.0 / 2.998e8, 1e-12);
  EXPECT_NEAR(s.los().delay * 1e9, 10.01, 0.01);
  EXPECT_EQ(s.los().aoa, 0.0);
  const auto s10 = generate_sample(10.0, cfg, rng);
  const auto s5 = generate_sample(5.0, cfg, rng);
  EXPECT_NEAR(gain_to_db(s10.los().gain) - gain_to_db(s5.los().gain), -6.0206, 1e-4);
}

TEST(Generator, OutOfRangeDistanceIsDomainError) {
  GeneratorConfig cfg;
  Rng rng(1);
  EXPECT_THROW(generate_sample(0.5, cfg, rng), thzgan::DomainError);
  EXPECT_THROW(generate_sample(31.0, cfg, rng), thzgan::DomainError);
  EXPECT_THROW(generate_sample(std::nan(""), cfg, rng), thzgan::DomainError);
}

TEST(Generator, ExcessDelayMeanMatchesExponentialLaw) {
  GeneratorConfig cfg;
  Rng rng(123);
  double sum = 0.0;
  std::size_t count = 0;
  while (count < 100000) {
    const auto s = generate_sample(rng.uniform(1.0, 30.0), cfg, rng);
    for (std::size_t l = 1; l < thzgan::channel::kNumMpcs; ++l) {
      sum += s.mpcs()[l].delay - s.los().delay;
      ++count;
    }
  }
  EXPECT_NEAR(sum / static_cast<double>(count), 20e-9, 0.2e-9);
}

TEST(Generator, ConfigValidation) {
  GeneratorConfig cfg;
  cfg.sample_count = 9;
  EXPECT_THROW(generate_dataset(cfg), thzgan::ConfigError);
  cfg = {};
  cfg.distance_min = 5.0;
  cfg.distance_max = 5.0;
  EXPECT_THROW(generate_dataset(cfg), thzgan::ConfigError);
  cfg = {};
  cfg.angle_scale = 0.0;
  EXPECT_THROW(generate_dataset(cfg), thzgan::ConfigError);
  cfg = {};
  cfg.delay_decay = -1.0;
  EXPECT_THROW(generate_dataset(cfg), thzgan::ConfigError);
}

TEST(Generator, SplitAndDeterminism) {
  GeneratorConfig cfg;
  cfg.sample_count = 100;
  cfg.seed = 77;
  const auto a = generate_dataset(cfg);
  EXPECT_EQ(a.train.size(), 80u);
  EXPECT_EQ(a.test.size(), 20u);
  const auto b = generate_dataset(cfg);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.scaler, b.scaler);
  cfg.seed = 78;
  EXPECT_NE(generate_dataset(cfg).train, a.train);
}

TEST(Generator, ScalerMatchesTrainExtrema) {
  GeneratorConfig cfg;
  cfg.sample_count = 300;
  const auto ds = generate_dataset(cfg);
  constexpr double inf = std::numeric_limits<double>::infinity();
  double lo[5] = {inf, inf, inf, inf, inf}, hi[5] = {-inf, -inf, -inf, -inf, -inf};
  for (const auto& s : ds.train) {
    for (const auto& m : s.mpcs()) {
      const double f[4] = {20.0 * std::log10(m.gain), m.phase, m.delay, m.aoa};
      for (int k = 0; k < 4; ++k) {
        lo[k] = std::min(lo[k], f[k]);
        hi[k] = std::max(hi[k], f[k]);
      }
    }
    lo[4] = std::min(lo[4], s.distance());
    hi[4] = std::max(hi[4], s.distance());
  }
  for (int k = 0; k < 5; ++k) {
    EXPECT_EQ(ds.scaler.ranges()[static_cast<std::size_t>(k)].min, lo[k]);
    EXPECT_EQ(ds.scaler.ranges()[static_cast<std::size_t>(k)].max, hi[k]);
  }
}

TEST(Generator, LosGainDecreasesWithDistance) {
  GeneratorConfig cfg;
  double previous = std::numeric_limits<double>::infinity();
  for (double d = 1.0; d <= 30.0; d += 1.0) {
    double mean = 0.0;
    for (int i = 0; i < 50; ++i) {
      Rng rng(thzgan::num::derive_seed(9, "los", static_cast<std::uint64_t>(i)));
      mean += generate_sample(d, cfg, rng).los().gain / 50.0;
    }
    EXPECT_LT(mean, previous);
    previous = mean;
  }
}

TEST(Generator, SpreadsAreStableAcrossSeeds) {
  GeneratorConfig cfg;
  cfg.sample_count = 10000;
  double ds[2], as[2];
  for (int k = 0; k < 2; ++k) {
    cfg.seed = 1000 + static_cast<std::uint64_t>(k);
    const auto data = generate_dataset(cfg);
    double d = 0.0, a = 0.0;
    std::size_t n = 0;
    for (const auto* split : {&data.train, &data.test}) {
      for (const auto& s : *split) {
        d += thzgan::metrics::delay_spread(s);
        a += thzgan::metrics::angular_spread(s);
        ++n;
      }
    }
    ds[k] = d / static_cast<double>(n);
    as[k] = a / static_cast<double>(n);
  }
  EXPECT_LT(std::abs(ds[0] - ds[1]) / ds[0], 0.05);
  EXPECT_LT(std::abs(as[0] - as[1]) / as[0], 0.05);
}

}  // namespace
