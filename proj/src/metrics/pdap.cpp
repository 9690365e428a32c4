#include "thzgan/metrics/pdap.hpp"

#include <cmath>
#include <string>

#include "thzgan/errors.hpp"

namespace thzgan::metrics {

void PdapConfig::validate() const {
  if (!(delay_bin > 0.0) || !(angle_bin > 0.0) || delay_bins == 0 || angle_bins == 0 || !std::isfinite(delay_bin) ||
      !std::isfinite(angle_bin) || !std::isfinite(angle_min) || !std::isfinite(floor_db)) {
    throw ConfigError("pdap grid needs positive finite bin widths and counts");
  }
}

PdapGrid::PdapGrid(const PdapConfig& config) : config_(config) {
  config_.validate();
  power_.assign(config_.delay_bins * config_.angle_bins, 0.0);
}

double power_to_db(double power, double floor_db) {
  if (!(power > 0.0)) return floor_db;
  const double db = 10.0 * std::log10(power);
  return db > floor_db ? db : floor_db;
}

std::vector<double> PdapGrid::db() const {
  std::vector<double> out(power_.size());
  for (std::size_t i = 0; i < power_.size(); ++i) out[i] = power_to_db(power_[i], config_.floor_db);
  return out;
}

double PdapGrid::db_at(std::size_t row, std::size_t col) const {
  return power_to_db(power_[row * cols() + col], config_.floor_db);
}

double PdapGrid::delay_at(std::size_t row) const { return static_cast<double>(row) * config_.delay_bin; }

double PdapGrid::angle_at(std::size_t col) const {
  return config_.angle_min + static_cast<double>(col) * config_.angle_bin;
}

namespace {

// Bin index of `offset / width`, clamped into [0, count).
std::size_t bin_index(double offset, double width, std::size_t count, bool& clipped) {
  const double pos = std::floor(offset / width);
  if (pos < 0.0) {
    clipped = true;
    return 0;
  }
  if (pos >= static_cast<double>(count)) {
    clipped = true;
    return count - 1;
  }
  return static_cast<std::size_t>(pos);
}

}  // namespace

void PdapGrid::deposit(const channel::Mpc& mpc) {
  bool clipped = false;
  const std::size_t row = bin_index(mpc.delay, config_.delay_bin, rows(), clipped);
  const std::size_t col = bin_index(mpc.aoa - config_.angle_min, config_.angle_bin, cols(), clipped);
  if (clipped) ++clipped_;
  power_[row * cols() + col] += mpc.gain * mpc.gain;
}

PdapGrid pdap(std::span<const channel::Mpc> mpcs, const PdapConfig& config) {
  PdapGrid grid(config);
  for (const auto& m : mpcs) grid.deposit(m);
  return grid;
}

PdapGrid pdap(const channel::ChannelSample& sample, const PdapConfig& config) { return pdap(sample.mpcs(), config); }

PdapGrid average_pdap(std::span<const channel::ChannelSample> samples, const PdapConfig& config) {
  if (samples.empty()) throw DomainError("average_pdap of an empty sample set");
  PdapGrid sum(config);
  for (const auto& s : samples) {
    for (const auto& m : s.mpcs()) sum.deposit(m);
  }
  const double n = static_cast<double>(samples.size());
  for (auto& p : sum.mutable_power()) p /= n;
  return sum;
}

double pdap_rmse(const PdapGrid& a, const PdapGrid& b) {
  if (!(a.config() == b.config())) throw ShapeError("pdap_rmse: grid configurations do not conform");
  const auto da = a.db();
  const auto db = b.db();
  double acc = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = da[i] - db[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(da.size()));
}

}  // namespace thzgan::metrics
