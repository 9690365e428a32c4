#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "thzgan/channel/scaler.hpp"
#include "thzgan/model/networks.hpp"
#include "thzgan/numerics/optimizer.hpp"

namespace thzgan::model {

struct NamedArray {
  std::string name;
  num::Shape shape;
  std::vector<double> values;

  bool operator==(const NamedArray&) const = default;
};

struct TrainingProgress {
  std::uint64_t epoch = 0;           // completed epochs
  std::uint64_t iteration = 0;       // discriminator steps taken
  std::uint64_t generator_steps = 0;
  std::uint64_t pending_d_steps = 0;  // D steps since the last G step
  std::uint64_t seed = 0;

  bool operator==(const TrainingProgress&) const = default;
};

/// Everything needed to sample from, or resume training of, a model.
struct Checkpoint {
  ModelConfig model;
  channel::Scaler scaler;
  std::vector<NamedArray> generator;
  std::vector<NamedArray> discriminator;
  num::OptimizerState generator_optimizer;
  num::OptimizerState discriminator_optimizer;
  TrainingProgress progress;
  // Free-form text entries: RNG stream states, the resolved run config.
  std::map<std::string, std::string> extras;
};

std::vector<NamedArray> snapshot(const ParamSet& params);
/// Copies values into the existing tensors; names and shapes must match.
void restore(const ParamSet& params, const std::vector<NamedArray>& arrays);

/// Binary layout, all integers little-endian u64 unless noted:
///   "THZGANCK" | u32 version
///   model config as (key, value) string pairs
///   scaler: 5 x (min, max) doubles
///   generator arrays, discriminator arrays: count, then per array
///     name | rank | extents | raw doubles
///   two optimizer states: kind, lr, beta1, beta2, eps, step, m, v
///   progress counters | extras as string pairs | "THZGANEND"
/// Strings are a u64 length followed by the bytes. Doubles are raw IEEE-754.
void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::map<std::string, std::string> model_config_entries(const ModelConfig& config);
ModelConfig model_config_from_entries(const std::map<std::string, std::string>& entries);

}  // namespace thzgan::model
