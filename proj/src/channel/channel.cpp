#include "thzgan/channel/channel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "thzgan/errors.hpp"

namespace thzgan::channel {

namespace {

[[noreturn]] void invalid(std::size_t index, const std::string& what) {
  throw ValidationError("MPC " + std::to_string(index + 1) + ": " + what);
}

}  // namespace

ChannelSample::ChannelSample(std::span<const Mpc> mpcs, double distance) : distance_(distance) {
  if (mpcs.size() != kNumMpcs) {
    throw ValidationError("expected " + std::to_string(kNumMpcs) + " MPCs, got " + std::to_string(mpcs.size()));
  }
  if (!std::isfinite(distance) || distance <= 0.0) {
    throw ValidationError("distance must be positive and finite, got " + std::to_string(distance));
  }
  for (std::size_t i = 0; i < kNumMpcs; ++i) {
    const Mpc& m = mpcs[i];
    if (!std::isfinite(m.gain) || !std::isfinite(m.phase) || !std::isfinite(m.delay) || !std::isfinite(m.aoa)) {
      invalid(i, "non-finite parameter");
    }
    if (m.gain <= 0.0) invalid(i, "gain must be positive");
    if (m.delay < 0.0) invalid(i, "delay must be non-negative");
    if (m.phase < 0.0 || m.phase >= 2.0 * std::numbers::pi) invalid(i, "phase outside [0, 2pi)");
    if (m.aoa < -180.0 || m.aoa >= 180.0) invalid(i, "angle of arrival outside [-180, 180)");
    if (i > 0 && m.delay < mpcs[i - 1].delay) invalid(i, "MPCs not sorted by delay");
    mpcs_[i] = m;
  }
  if (mpcs_[0].aoa != 0.0) invalid(0, "line-of-sight path must arrive at 0 degrees");
}

}  // namespace thzgan::channel
