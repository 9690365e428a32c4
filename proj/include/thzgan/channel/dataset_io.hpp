#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "thzgan/channel/channel.hpp"
#include "thzgan/channel/scaler.hpp"

namespace thzgan::channel {

/// Text dataset file. One header line, then one record per line:
///
///   # thzgan dataset v1 records=<N> train=<K>
///   <distance_m>;<gain>,<phase>,<delay>,<aoa>;...;<gain>,<phase>,<delay>,<aoa>
///
/// The first K records form the training split. Reals are written with 17
/// significant digits, so a write/read cycle is lossless.
struct ChannelRecords {
  std::vector<ChannelSample> samples;
  std::size_t train_count = 0;

  std::span<const ChannelSample> train() const { return {samples.data(), train_count}; }
  std::span<const ChannelSample> test() const {
    return {samples.data() + train_count, samples.size() - train_count};
  }

  bool operator==(const ChannelRecords&) const = default;
};

inline constexpr int kDatasetFormatVersion = 1;
inline constexpr int kScalerFormatVersion = 1;

void write_dataset(std::ostream& out, std::span<const ChannelSample> samples, std::size_t train_count);
ChannelRecords read_dataset(std::istream& in);

/// Scaler file: a version header then `<feature>.min = v` / `<feature>.max = v` lines.
void write_scaler(std::ostream& out, const Scaler& scaler);
Scaler read_scaler(std::istream& in);

void save_dataset(const std::filesystem::path& path, std::span<const ChannelSample> samples, std::size_t train_count);
ChannelRecords load_dataset(const std::filesystem::path& path);
void save_scaler(const std::filesystem::path& path, const Scaler& scaler);
Scaler load_scaler(const std::filesystem::path& path);

std::string format_real(double value);

}  // namespace thzgan::channel
