#include "thzgan/channel/scaler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "thzgan/errors.hpp"

namespace thzgan::channel {

std::string feature_name(Feature feature) {
  switch (feature) {
    case Feature::gain_db: return "gain_db";
    case Feature::phase: return "phase";
    case Feature::delay: return "delay";
    case Feature::aoa: return "aoa";
    case Feature::distance: return "distance";
  }
  return "unknown";
}

Scaler::Scaler(const std::array<FeatureRange, kNumFeatures>& ranges) : ranges_(ranges) {
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    const auto& r = ranges_[f];
    if (!std::isfinite(r.min) || !std::isfinite(r.max) || !(r.max > r.min)) {
      throw ConfigError("degenerate scaler range for " + feature_name(static_cast<Feature>(f)) + ": [" +
                        std::to_string(r.min) + ", " + std::to_string(r.max) + "]");
    }
  }
}

double gain_to_db(double gain) { return 20.0 * std::log10(gain); }
double db_to_gain(double db) { return std::pow(10.0, db / 20.0); }

Scaler Scaler::fit(std::span<const ChannelSample> samples) {
  if (samples.empty()) throw ConfigError("cannot fit a scaler on an empty sample set");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::array<FeatureRange, kNumFeatures> ranges;
  ranges.fill({inf, -inf});
  auto widen = [&](Feature f, double v) {
    auto& r = ranges[static_cast<std::size_t>(f)];
    r.min = std::min(r.min, v);
    r.max = std::max(r.max, v);
  };
  for (const auto& s : samples) {
    for (const auto& m : s.mpcs()) {
      widen(Feature::gain_db, gain_to_db(m.gain));
      widen(Feature::phase, m.phase);
      widen(Feature::delay, m.delay);
      widen(Feature::aoa, m.aoa);
    }
    widen(Feature::distance, s.distance());
  }
  return Scaler(ranges);
}

double Scaler::to_unit(Feature feature, double value) const {
  const auto& r = range(feature);
  return std::clamp((value - r.min) / (r.max - r.min), 0.0, 1.0);
}

double Scaler::from_unit(Feature feature, double unit) const {
  const auto& r = range(feature);
  return r.min + std::clamp(unit, 0.0, 1.0) * (r.max - r.min);
}

NormalizedSample normalize(const ChannelSample& sample, const Scaler& scaler) {
  NormalizedSample out;
  std::size_t k = 0;
  for (const auto& m : sample.mpcs()) {
    out.features[k++] = scaler.to_unit(Feature::gain_db, gain_to_db(m.gain));
    out.features[k++] = scaler.to_unit(Feature::phase, m.phase);
    out.features[k++] = scaler.to_unit(Feature::delay, m.delay);
    out.features[k++] = scaler.to_unit(Feature::aoa, m.aoa);
  }
  out.condition = scaler.to_unit(Feature::distance, sample.distance());
  return out;
}

ChannelSample denormalize(std::span<const double> features, double condition, const Scaler& scaler) {
  if (features.size() != kFlatWidth) {
    throw ShapeError("denormalize: expected " + std::to_string(kFlatWidth) + " features, got " +
                     std::to_string(features.size()));
  }
  std::vector<Mpc> mpcs(kNumMpcs);
  for (std::size_t l = 0; l < kNumMpcs; ++l) {
    const double* f = features.data() + l * kMpcFeatures;
    mpcs[l].gain = db_to_gain(scaler.from_unit(Feature::gain_db, f[0]));
    mpcs[l].phase = scaler.from_unit(Feature::phase, f[1]);
    mpcs[l].delay = scaler.from_unit(Feature::delay, f[2]);
    mpcs[l].aoa = scaler.from_unit(Feature::aoa, f[3]);
  }
  std::stable_sort(mpcs.begin(), mpcs.end(), [](const Mpc& a, const Mpc& b) { return a.delay < b.delay; });
  mpcs.front().aoa = 0.0;
  return ChannelSample(mpcs, scaler.from_unit(Feature::distance, condition));
}

}  // namespace thzgan::channel
