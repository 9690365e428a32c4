#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>

#include "thzgan/channel/channel.hpp"

namespace thzgan::channel {

enum class Feature : std::size_t { gain_db = 0, phase, delay, aoa, distance };
inline constexpr std::size_t kNumFeatures = 5;

std::string feature_name(Feature feature);

struct FeatureRange {
  double min = 0.0;
  double max = 1.0;

  bool operator==(const FeatureRange&) const = default;
};

/// Per-feature min-max bounds. Gains are scaled in dB (20 log10 of the
/// amplitude); every other feature in its natural unit. Ranges are pooled
/// over all MPCs of a sample.
class Scaler {
 public:
  Scaler() = default;
  // Throws ConfigError unless max > min (and both finite) for every feature.
  explicit Scaler(const std::array<FeatureRange, kNumFeatures>& ranges);

  static Scaler fit(std::span<const ChannelSample> samples);

  const FeatureRange& range(Feature feature) const { return ranges_[static_cast<std::size_t>(feature)]; }
  const std::array<FeatureRange, kNumFeatures>& ranges() const noexcept { return ranges_; }

  // Affine map to [0, 1]; out-of-range values clip to the boundary.
  double to_unit(Feature feature, double value) const;
  // Inverse map; the argument is clamped to [0, 1] first.
  double from_unit(Feature feature, double unit) const;

  bool operator==(const Scaler&) const = default;

 private:
  std::array<FeatureRange, kNumFeatures> ranges_{};
};

struct NormalizedSample {
  // MPC-major: (gain_db, phase, delay, aoa) for MPC 1, then MPC 2, ...
  std::array<double, kFlatWidth> features{};
  double condition = 0.0;
};

double gain_to_db(double gain);
double db_to_gain(double db);

NormalizedSample normalize(const ChannelSample& sample, const Scaler& scaler);

/// Maps a flat [0,1]^60 vector back to a valid ChannelSample: clamps, undoes
/// the scaling, re-sorts by delay, and pins the earliest path to 0 degrees.
ChannelSample denormalize(std::span<const double> features, double condition, const Scaler& scaler);

}  // namespace thzgan::channel
