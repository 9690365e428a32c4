#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace thzgan::channel {

inline constexpr std::size_t kNumMpcs = 15;
inline constexpr std::size_t kMpcFeatures = 4;
inline constexpr std::size_t kFlatWidth = kNumMpcs * kMpcFeatures;

/// One multipath component. Gain is the linear amplitude, phase in radians
/// on [0, 2pi), delay in seconds, azimuth angle of arrival in degrees on
/// [-180, 180).
struct Mpc {
  double gain = 0.0;
  double phase = 0.0;
  double delay = 0.0;
  double aoa = 0.0;

  bool operator==(const Mpc&) const = default;
};

/// A channel realization: exactly kNumMpcs paths sorted by delay, the first
/// being the line-of-sight path at 0 degrees, plus the Tx-Rx distance in
/// meters it was drawn for. Construction throws ValidationError on any
/// violated invariant, so every instance is valid.
class ChannelSample {
 public:
  ChannelSample(std::span<const Mpc> mpcs, double distance);

  const std::array<Mpc, kNumMpcs>& mpcs() const noexcept { return mpcs_; }
  const Mpc& los() const noexcept { return mpcs_.front(); }
  double distance() const noexcept { return distance_; }

  bool operator==(const ChannelSample&) const = default;

 private:
  std::array<Mpc, kNumMpcs> mpcs_{};
  double distance_ = 0.0;
};

}  // namespace thzgan::channel
