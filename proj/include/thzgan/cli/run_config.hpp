#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "thzgan/dataset/generator.hpp"
#include "thzgan/metrics/pdap.hpp"
#include "thzgan/model/networks.hpp"
#include "thzgan/training/trainer.hpp"

namespace thzgan::cli {

/// Everything a run depends on. The master seed overrides the seeds in the
/// generator and training sections (see resolved()).
///
/// Config files are line based: `section.key = value`, with `#` comments and
/// blank lines ignored. Unknown and repeated keys are rejected.
struct RunConfig {
  std::uint64_t seed = 1;
  dataset::GeneratorConfig dataset;
  model::ModelConfig model;
  training::TrainConfig train;
  metrics::PdapConfig grid;
  double pair_tolerance = 0.5;  // m, for distance-paired SSIM

  std::string dataset_path;
  std::string checkpoint_path;
  std::string out_dir = ".";

  /// Desk-scale defaults: 2000 samples, 300 epochs, a 2-layer encoder.
  static RunConfig desk_defaults();

  /// Copy with the master seed pushed into every seeded section.
  RunConfig resolved() const;

  void set(const std::string& key, const std::string& value);  // ConfigError
  std::string get(const std::string& key) const;
  void validate() const;  // ConfigError
};

struct ConfigKey {
  std::string name;
  std::string help;
};

/// Every recognized key, in the order resolved configs are written.
const std::vector<ConfigKey>& config_keys();

/// Applies the `key = value` lines of `in` on top of `base`.
RunConfig parse_run_config(std::istream& in, RunConfig base = RunConfig::desk_defaults());
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = RunConfig::desk_defaults());

/// Writes every key with its current value; parse_run_config reads it back.
void write_run_config(std::ostream& out, const RunConfig& config);

}  // namespace thzgan::cli
