#pragma once

#include <span>

#include "thzgan/channel/channel.hpp"

namespace thzgan::metrics {

/// RMS delay spread in seconds, weighting each path by its power gain^2.
double delay_spread(std::span<const channel::Mpc> mpcs);
double delay_spread(const channel::ChannelSample& sample);

/// RMS angular spread in degrees; angles are taken as plain reals.
double angular_spread(std::span<const channel::Mpc> mpcs);
double angular_spread(const channel::ChannelSample& sample);

}  // namespace thzgan::metrics
