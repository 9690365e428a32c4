#include "thzgan/metrics/spread.hpp"

#include <cmath>

#include "thzgan/errors.hpp"

namespace thzgan::metrics {

namespace {

template <class Field>
double weighted_rms(std::span<const channel::Mpc> mpcs, Field field, const char* what) {
  double total = 0.0;
  double first = 0.0;
  for (const auto& m : mpcs) {
    const double p = m.gain * m.gain;
    total += p;
    first += field(m) * p;
  }
  if (!(total > 0.0)) throw DomainError(std::string(what) + ": total path power is zero");
  const double mean = first / total;
  double second = 0.0;
  for (const auto& m : mpcs) {
    const double d = field(m) - mean;
    second += d * d * (m.gain * m.gain);
  }
  return std::sqrt(second / total);
}

}  // namespace

double delay_spread(std::span<const channel::Mpc> mpcs) {
  return weighted_rms(mpcs, [](const channel::Mpc& m) { return m.delay; }, "delay_spread");
}

double delay_spread(const channel::ChannelSample& sample) { return delay_spread(sample.mpcs()); }

double angular_spread(std::span<const channel::Mpc> mpcs) {
  return weighted_rms(mpcs, [](const channel::Mpc& m) { return m.aoa; }, "angular_spread");
}

double angular_spread(const channel::ChannelSample& sample) { return angular_spread(sample.mpcs()); }

}  // namespace thzgan::metrics
