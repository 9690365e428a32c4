#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "support/metric_oracles.hpp"
#include "thzgan/errors.hpp"
#include "thzgan/metrics/cdf.hpp"
#include "thzgan/metrics/pdap.hpp"
#include "thzgan/metrics/spread.hpp"
#include "thzgan/metrics/ssim.hpp"

namespace {

using namespace thzgan::metrics;
using thzgan::channel::ChannelSample;
using thzgan::channel::Mpc;
using thzgan::num::Rng;
using namespace thzgan::testing;

std::vector<double> shifted_db(const PdapGrid& g) {
  auto v = g.db();
  for (auto& x : v) x -= g.config().floor_db;
  return v;
}

TEST(Spread, HandCases) {
  std::vector<Mpc> single{{1e-3, 0.0, 5e-9, 12.0}};
  EXPECT_EQ(delay_spread(single), 0.0);
  EXPECT_EQ(angular_spread(single), 0.0);

  std::vector<Mpc> pair{{1.0, 0.0, 0.0, -30.0}, {1.0, 0.0, 10e-9, 30.0}};
  EXPECT_NEAR(delay_spread(pair), 5e-9, 1e-21);
  EXPECT_DOUBLE_EQ(angular_spread(pair), 30.0);

  std::vector<Mpc> silent{{0.0, 0.0, 0.0, 0.0}};
  EXPECT_THROW(delay_spread(silent), thzgan::DomainError);
}

TEST(Spread, MatchesOracleAndProperties) {
  Rng rng(4);
  for (int t = 0; t < 1000; ++t) {
    const auto s = random_channel(rng);
    ASSERT_LE(rel_diff(delay_spread(s), oracle_delay_spread(s)), 1e-12);
    ASSERT_LE(rel_diff(angular_spread(s), oracle_angular_spread(s)), 1e-12);

    auto scaled = std::vector<Mpc>(s.mpcs().begin(), s.mpcs().end());
    auto shifted = scaled;
    for (auto& m : scaled) m.gain *= 37.5;
    for (auto& m : shifted) m.delay += 50e-9;
    ASSERT_LE(rel_diff(delay_spread(scaled), delay_spread(s)), 1e-12);
    ASSERT_LE(rel_diff(angular_spread(scaled), angular_spread(s)), 1e-12);
    ASSERT_LE(rel_diff(delay_spread(shifted), delay_spread(s)), 1e-9);
  }
}

TEST(Pdap, SingleAndSharedBins) {
  PdapConfig cfg;
  std::vector<Mpc> one{{1e-4, 0.0, 12e-9, 5.0}};
  const auto g = pdap(one, cfg);
  std::size_t above = 0;
  for (double v : g.db()) above += v > cfg.floor_db ? 1 : 0;
  EXPECT_EQ(above, 1u);
  EXPECT_NEAR(g.db_at(4, 92), -80.0, 1e-12);

  std::vector<Mpc> two{{1e-4, 0.0, 12e-9, 5.0}, {2e-4, 0.0, 12.4e-9, 5.5}};
  const auto h = pdap(two, cfg);
  EXPECT_DOUBLE_EQ(h.db_at(4, 92), 10.0 * std::log10(1e-8 + 4e-8));
  EXPECT_EQ(h.clipped(), 0u);
}

TEST(Pdap, ClampsAndCountsOutOfRange) {
  PdapConfig cfg;
  std::vector<Mpc> far{{1e-4, 0.0, 1e-6, 0.0}};
  const auto g = pdap(far, cfg);
  EXPECT_EQ(g.clipped(), 1u);
  EXPECT_GT(g.db_at(cfg.delay_bins - 1, 90), cfg.floor_db);
}

TEST(Pdap, MatchesOracleAndConservesPower) {
  PdapConfig cfg;
  Rng rng(8);
  for (int t = 0; t < 200; ++t) {
    const auto s = random_channel(rng);
    const auto g = pdap(s, cfg);
    const auto o = oracle_pdap({&s}, cfg.delay_bins, cfg.angle_bins, cfg.delay_bin, cfg.angle_bin, cfg.angle_min,
                               cfg.floor_db);
    double total = 0.0, direct = 0.0;
    for (std::size_t i = 0; i < o.power.size(); ++i) {
      ASSERT_LE(rel_diff(g.power()[i], o.power[i]), 1e-12);
      total += g.power()[i];
    }
    for (const auto& m : s.mpcs()) direct += m.gain * m.gain;
    ASSERT_LE(rel_diff(total, direct), 1e-12);
  }
}

TEST(Pdap, AverageMatchesHandComputation) {
  PdapConfig cfg;
  Rng rng(2);
  const auto a = random_channel(rng);
  const auto b = random_channel(rng);
  std::vector<ChannelSample> both{a, b};
  const auto avg = average_pdap(both, cfg);
  const auto pa = pdap(a, cfg);
  const auto pb = pdap(b, cfg);
  for (std::size_t i = 0; i < avg.power().size(); ++i) {
    ASSERT_LE(rel_diff(avg.power()[i], 0.5 * (pa.power()[i] + pb.power()[i])), 1e-12);
  }
  std::vector<ChannelSample> just_a{a};
  EXPECT_EQ(pdap_rmse(average_pdap(just_a, cfg), pa), 0.0);
}

TEST(Rmse, OffsetIdentityAndMetricAxioms) {
  PdapConfig cfg;
  cfg.delay_bins = 12;
  cfg.angle_bins = 10;
  Rng rng(5);
  PdapGrid a(cfg), b(cfg), c(cfg);
  for (std::size_t i = 0; i < a.power().size(); ++i) {
    const double db = rng.uniform(-150.0, -60.0);
    a.mutable_power()[i] = std::pow(10.0, db / 10.0);
    b.mutable_power()[i] = std::pow(10.0, (db + 2.0) / 10.0);
    c.mutable_power()[i] = std::pow(10.0, rng.uniform(-190.0, -50.0) / 10.0);
  }
  EXPECT_NEAR(pdap_rmse(a, b), 2.0, 1e-12);
  EXPECT_EQ(pdap_rmse(a, a), 0.0);
  EXPECT_EQ(pdap_rmse(a, c), pdap_rmse(c, a));
  EXPECT_LE(pdap_rmse(a, c), pdap_rmse(a, b) + pdap_rmse(b, c) + 1e-12);
  EXPECT_NEAR(pdap_rmse(a, c), oracle_rmse(a.db(), c.db()), 1e-12);

  PdapConfig other = cfg;
  other.angle_bins = 11;
  EXPECT_THROW(pdap_rmse(a, PdapGrid(other)), thzgan::ShapeError);
  EXPECT_THROW(ssim(a, PdapGrid(other)), thzgan::ShapeError);
}

TEST(Ssim, SelfSymmetryAndOracle) {
  PdapConfig cfg;
  Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    const auto s1 = random_channel(rng);
    const auto s2 = random_channel(rng);
    const auto g1 = pdap(s1, cfg);
    const auto g2 = pdap(s2, cfg);
    EXPECT_EQ(ssim(g1, g1), 1.0);
    EXPECT_EQ(ssim(g1, g2), ssim(g2, g1));
    const auto x = shifted_db(g1);
    const auto y = shifted_db(g2);
    const double range = std::max(*std::max_element(x.begin(), x.end()), *std::max_element(y.begin(), y.end()));
    EXPECT_NEAR(ssim(g1, g2), oracle_ssim(x, y, g1.rows(), g1.cols(), range), 1e-9);
  }
}

TEST(Ssim, ConstantGridsOffsetByHalfRange) {
  PdapConfig cfg;
  cfg.delay_bins = 20;
  cfg.angle_bins = 16;
  PdapGrid lo(cfg), hi(cfg);
  // Peak 100 dB above the floor, so R = 100 and the offset is 50 dB.
  for (auto& p : lo.mutable_power()) p = std::pow(10.0, -150.0 / 10.0);
  for (auto& p : hi.mutable_power()) p = std::pow(10.0, -100.0 / 10.0);
  std::vector<double> x(lo.power().size(), 50.0), y(hi.power().size(), 100.0);
  const double expected = oracle_ssim(x, y, cfg.delay_bins, cfg.angle_bins, 100.0);
  EXPECT_NEAR(ssim(lo, hi), expected, 1e-9);
  EXPECT_NEAR(expected, (2 * 50.0 * 100.0 + 1.0) / (50.0 * 50.0 + 100.0 * 100.0 + 1.0), 1e-12);
}

TEST(Ssim, SmallGridUsesGlobalWindow) {
  PdapConfig cfg;
  cfg.delay_bins = 4;
  cfg.angle_bins = 5;
  Rng rng(1);
  PdapGrid a(cfg), b(cfg);
  for (std::size_t i = 0; i < a.power().size(); ++i) {
    a.mutable_power()[i] = std::pow(10.0, rng.uniform(-190.0, -90.0) / 10.0);
    b.mutable_power()[i] = std::pow(10.0, rng.uniform(-190.0, -90.0) / 10.0);
  }
  const auto x = shifted_db(a);
  const auto y = shifted_db(b);
  const double range = std::max(*std::max_element(x.begin(), x.end()), *std::max_element(y.begin(), y.end()));
  EXPECT_NEAR(ssim(a, b), oracle_ssim(x, y, 4, 5, range), 1e-9);
  EXPECT_EQ(ssim(a, a), 1.0);
}

TEST(Cdf, HandCasesAndOracle) {
  std::vector<double> one{5.0};
  const auto t1 = cdf(one);
  EXPECT_EQ(t1.values, std::vector<double>{5.0});
  EXPECT_EQ(t1.probabilities, std::vector<double>{1.0});

  std::vector<double> four{3.0, 1.0, 4.0, 2.0};
  const auto t4 = cdf(four);
  EXPECT_EQ(t4.probabilities, (std::vector<double>{0.25, 0.5, 0.75, 1.0}));
  EXPECT_EQ(t4.values, (std::vector<double>{1.0, 2.0, 3.0, 4.0}));
  EXPECT_EQ(t4.quantile(0.5), 2.0);

  Rng rng(3);
  std::vector<double> values(500);
  for (auto& v : values) v = rng.normal();
  const auto table = cdf(values);
  const auto expected = oracle_cdf_probability(values);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto pos = std::lower_bound(table.values.begin(), table.values.end(), values[i]) - table.values.begin();
    ASSERT_EQ(table.probabilities[static_cast<std::size_t>(pos)], expected[i]);
  }

  std::ostringstream csv;
  write_cdf_csv(csv, t4);
  EXPECT_EQ(csv.str(), "value,probability\n1,0.25\n2,0.5\n3,0.75\n4,1\n");
}

}  // namespace
