#pragma once

// Straightforward reference versions of the evaluation metrics. They are
// written from the textbook formulas with explicit index loops and share no
// code with the library implementations.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "thzgan/channel/channel.hpp"
#include "thzgan/numerics/random.hpp"

namespace thzgan::testing {

struct OracleGrid {
  std::size_t rows = 0, cols = 0;
  double dt = 0, da = 0, amin = 0, floor_db = 0;
  std::vector<double> power;  // row-major, linear
};

inline double oracle_spread(const std::vector<double>& x, const std::vector<double>& gain) {
  const std::size_t n = x.size();
  std::vector<double> w(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += gain[i] * gain[i];
  for (std::size_t i = 0; i < n; ++i) w[i] = gain[i] * gain[i] / total;
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += w[i] * x[i];
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) var += w[i] * (x[i] - mean) * (x[i] - mean);
  return std::sqrt(var);
}

inline double oracle_delay_spread(const channel::ChannelSample& s) {
  std::vector<double> x, g;
  for (std::size_t l = 0; l < channel::kNumMpcs; ++l) {
    x.push_back(s.mpcs()[l].delay);
    g.push_back(s.mpcs()[l].gain);
  }
  return oracle_spread(x, g);
}

inline double oracle_angular_spread(const channel::ChannelSample& s) {
  std::vector<double> x, g;
  for (std::size_t l = 0; l < channel::kNumMpcs; ++l) {
    x.push_back(s.mpcs()[l].aoa);
    g.push_back(s.mpcs()[l].gain);
  }
  return oracle_spread(x, g);
}

// Cell (i, j) collects every path with i*dt <= delay < (i+1)*dt and likewise
// for the angle; nothing is clamped, paths outside are dropped.
inline OracleGrid oracle_pdap(const std::vector<const channel::ChannelSample*>& samples, std::size_t rows,
                              std::size_t cols, double dt, double da, double amin, double floor_db) {
  OracleGrid g{rows, cols, dt, da, amin, floor_db, std::vector<double>(rows * cols, 0.0)};
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      double p = 0.0;
      for (const auto* s : samples) {
        for (const auto& m : s->mpcs()) {
          const bool in_delay = m.delay >= i * dt && m.delay < (i + 1) * dt;
          const bool in_angle = m.aoa >= amin + j * da && m.aoa < amin + (j + 1) * da;
          if (in_delay && in_angle) p += m.gain * m.gain;
        }
      }
      g.power[i * cols + j] = p / static_cast<double>(samples.size());
    }
  }
  return g;
}

inline double oracle_db(double p, double floor_db) {
  if (p <= 0.0) return floor_db;
  return std::max(floor_db, 10.0 * std::log10(p));
}

inline double oracle_rmse(const std::vector<double>& a_db, const std::vector<double>& b_db) {
  double s = 0.0;
  for (std::size_t i = 0; i < a_db.size(); ++i) s += std::pow(a_db[i] - b_db[i], 2);
  return std::sqrt(s / static_cast<double>(a_db.size()));
}

// Windowed SSIM on images already offset to [0, range].
inline double oracle_ssim(const std::vector<double>& x, const std::vector<double>& y, std::size_t rows,
                          std::size_t cols, double range, std::size_t win = 8) {
  const double k1 = 0.01 * range, k2 = 0.03 * range;
  const double c1 = k1 * k1, c2 = k2 * k2;
  auto one = [&](std::size_t r0, std::size_t c0, std::size_t h, std::size_t w) {
    const double n = static_cast<double>(h * w);
    double mx = 0, my = 0;
    for (std::size_t r = r0; r < r0 + h; ++r)
      for (std::size_t c = c0; c < c0 + w; ++c) mx += x[r * cols + c];
    for (std::size_t r = r0; r < r0 + h; ++r)
      for (std::size_t c = c0; c < c0 + w; ++c) my += y[r * cols + c];
    mx /= n;
    my /= n;
    double sx = 0, sy = 0, sxy = 0;
    for (std::size_t r = r0; r < r0 + h; ++r) {
      for (std::size_t c = c0; c < c0 + w; ++c) {
        sx += (x[r * cols + c] - mx) * (x[r * cols + c] - mx);
        sy += (y[r * cols + c] - my) * (y[r * cols + c] - my);
        sxy += (x[r * cols + c] - mx) * (y[r * cols + c] - my);
      }
    }
    sx /= n;
    sy /= n;
    sxy /= n;
    const double lum = (2 * mx * my + c1) / (mx * mx + my * my + c1);
    const double cs = (2 * sxy + c2) / (sx + sy + c2);
    return lum * cs;
  };
  if (rows < win || cols < win) return one(0, 0, rows, cols);
  double total = 0;
  std::size_t count = 0;
  for (std::size_t r = 0; r + win <= rows; ++r) {
    for (std::size_t c = 0; c + win <= cols; ++c) {
      total += one(r, c, win, win);
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

// Probability of each input value under the empirical CDF: the fraction of
// values less than or equal to it.
inline std::vector<double> oracle_cdf_probability(const std::vector<double>& values) {
  std::vector<double> out;
  for (double v : values) {
    std::size_t count = 0;
    for (double w : values) count += (w <= v) ? 1 : 0;
    out.push_back(static_cast<double>(count) / static_cast<double>(values.size()));
  }
  return out;
}

// A valid random channel whose paths land inside the default grid extent.
inline channel::ChannelSample random_channel(num::Rng& rng) {
  std::vector<channel::Mpc> mpcs(channel::kNumMpcs);
  std::vector<double> delays(channel::kNumMpcs);
  for (auto& d : delays) d = rng.uniform(0.0, 390e-9);
  std::sort(delays.begin(), delays.end());
  for (std::size_t l = 0; l < channel::kNumMpcs; ++l) {
    mpcs[l].gain = std::pow(10.0, rng.uniform(-9.0, -3.0));
    mpcs[l].phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    mpcs[l].delay = delays[l];
    mpcs[l].aoa = l == 0 ? 0.0 : rng.uniform(-180.0, 180.0);
  }
  return channel::ChannelSample(mpcs, rng.uniform(1.0, 30.0));
}

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace thzgan::testing
