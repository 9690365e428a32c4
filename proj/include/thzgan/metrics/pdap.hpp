#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "thzgan/channel/channel.hpp"

namespace thzgan::metrics {

struct PdapConfig {
  double delay_bin = 2.5e-9;  // s
  std::size_t delay_bins = 160;
  double angle_bin = 2.0;  // deg
  std::size_t angle_bins = 180;
  double angle_min = -180.0;
  double floor_db = -200.0;

  void validate() const;  // ConfigError on non-positive widths or counts
  bool operator==(const PdapConfig&) const = default;
};

/// Delay x angle power profile. Rows index delay bins, columns angle bins.
class PdapGrid {
 public:
  explicit PdapGrid(const PdapConfig& config);

  const PdapConfig& config() const noexcept { return config_; }
  std::size_t rows() const noexcept { return config_.delay_bins; }
  std::size_t cols() const noexcept { return config_.angle_bins; }

  // Linear power per cell and its dB view (floored).
  std::span<const double> power() const noexcept { return power_; }
  std::span<double> mutable_power() noexcept { return power_; }
  std::vector<double> db() const;
  double db_at(std::size_t row, std::size_t col) const;

  double delay_at(std::size_t row) const;  // left bin edge, s
  double angle_at(std::size_t col) const;  // left bin edge, deg

  // Number of MPCs that fell outside the grid and were clamped to an edge.
  std::size_t clipped() const noexcept { return clipped_; }

  void deposit(const channel::Mpc& mpc);

 private:
  PdapConfig config_;
  std::vector<double> power_;
  std::size_t clipped_ = 0;
};

double power_to_db(double power, double floor_db);

PdapGrid pdap(std::span<const channel::Mpc> mpcs, const PdapConfig& config);
PdapGrid pdap(const channel::ChannelSample& sample, const PdapConfig& config);

/// Cell-wise mean of linear power over the samples.
PdapGrid average_pdap(std::span<const channel::ChannelSample> samples, const PdapConfig& config);

/// Root-mean-square difference of the dB views. Throws ShapeError when the
/// grid configs differ.
double pdap_rmse(const PdapGrid& a, const PdapGrid& b);

}  // namespace thzgan::metrics
