#include "thzgan/cli/run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "thzgan/channel/dataset_io.hpp"
#include "thzgan/errors.hpp"

namespace thzgan::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

double parse_real(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty() || !std::isfinite(v)) {
    throw ConfigError(key + ": expected a finite number, got '" + text + "'");
  }
  return v;
}

struct Entry {
  std::string help;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Entry size_entry(std::string help, T RunConfig::*section, std::size_t T::*field) {
  return {std::move(help),
          [=](RunConfig& c, const std::string& key, const std::string& v) {
            (c.*section).*field = static_cast<std::size_t>(parse_unsigned(key, v));
          },
          [=](const RunConfig& c) { return std::to_string((c.*section).*field); }};
}

template <typename T>
Entry real_entry(std::string help, T RunConfig::*section, double T::*field) {
  return {std::move(help),
          [=](RunConfig& c, const std::string& key, const std::string& v) { (c.*section).*field = parse_real(key, v); },
          [=](const RunConfig& c) { return channel::format_real((c.*section).*field); }};
}

template <typename T, typename E>
Entry enum_entry(std::string help, T RunConfig::*section, E T::*field, E (*from)(const std::string&),
                 std::string (*to)(E)) {
  return {std::move(help),
          [=](RunConfig& c, const std::string& key, const std::string& v) {
            try {
              (c.*section).*field = from(v);
            } catch (const ConfigError& e) {
              throw ConfigError(key + ": " + e.what());
            }
          },
          [=](const RunConfig& c) { return to((c.*section).*field); }};
}

Entry string_entry(std::string help, std::string RunConfig::*field) {
  return {std::move(help), [=](RunConfig& c, const std::string&, const std::string& v) { c.*field = v; },
          [=](const RunConfig& c) { return c.*field; }};
}

using Table = std::vector<std::pair<std::string, Entry>>;

const Table& table() {
  using dataset::GeneratorConfig;
  using metrics::PdapConfig;
  using model::EncoderConfig;
  using model::ModelConfig;
  using training::TrainConfig;
  static const Table t = [] {
    Table t;
    t.emplace_back("seed", Entry{"master seed for every random stream",
                                 [](RunConfig& c, const std::string& k, const std::string& v) {
                                   c.seed = parse_unsigned(k, v);
                                 },
                                 [](const RunConfig& c) { return std::to_string(c.seed); }});

    t.emplace_back("paths.dataset", string_entry("dataset file read by train and eval", &RunConfig::dataset_path));
    t.emplace_back("paths.checkpoint", string_entry("checkpoint read by sample", &RunConfig::checkpoint_path));
    t.emplace_back("paths.out_dir", string_entry("directory receiving all outputs", &RunConfig::out_dir));

    t.emplace_back("dataset.sample_count",
                   size_entry("number of channel samples", &RunConfig::dataset, &GeneratorConfig::sample_count));
    t.emplace_back("dataset.distance_min",
                   real_entry("smallest Tx-Rx distance, m", &RunConfig::dataset, &GeneratorConfig::distance_min));
    t.emplace_back("dataset.distance_max",
                   real_entry("largest Tx-Rx distance, m", &RunConfig::dataset, &GeneratorConfig::distance_max));
    t.emplace_back("dataset.carrier_frequency",
                   real_entry("carrier frequency, Hz", &RunConfig::dataset, &GeneratorConfig::carrier_frequency));
    t.emplace_back("dataset.delay_decay", real_entry("mean NLoS excess delay, s", &RunConfig::dataset,
                                                     &GeneratorConfig::delay_decay));
    t.emplace_back("dataset.angle_scale", real_entry("Laplacian scale of NLoS angles, deg", &RunConfig::dataset,
                                                     &GeneratorConfig::angle_scale));
    t.emplace_back("dataset.shadowing_db", real_entry("NLoS shadowing std-dev, dB", &RunConfig::dataset,
                                                      &GeneratorConfig::shadowing_db));
    t.emplace_back("dataset.train_fraction", real_entry("fraction of samples in the training split",
                                                        &RunConfig::dataset, &GeneratorConfig::train_fraction));

    auto encoder = [&](const char* name, std::size_t EncoderConfig::*field, const char* help) {
      t.emplace_back(std::string("model.") + name,
                     Entry{help,
                           [=](RunConfig& c, const std::string& k, const std::string& v) {
                             c.model.encoder.*field = static_cast<std::size_t>(parse_unsigned(k, v));
                           },
                           [=](const RunConfig& c) { return std::to_string(c.model.encoder.*field); }});
    };
    encoder("num_layers", &EncoderConfig::num_layers, "encoder layers");
    encoder("num_heads", &EncoderConfig::num_heads, "attention heads per layer");
    encoder("model_dim", &EncoderConfig::model_dim, "embedding width before the per-MPC projection");
    encoder("key_dim", &EncoderConfig::key_dim, "query/key width per head");
    encoder("value_dim", &EncoderConfig::value_dim, "value width per head");
    encoder("ffn_dim", &EncoderConfig::ffn_dim, "feed-forward hidden width");
    t.emplace_back("model.noise_dim", size_entry("generator noise width", &RunConfig::model, &ModelConfig::noise_dim));
    t.emplace_back("model.head_hidden",
                   size_entry("generator output head hidden width", &RunConfig::model, &ModelConfig::head_hidden));
    t.emplace_back("model.pe_init_std",
                   real_entry("std-dev of the learned position embedding", &RunConfig::model, &ModelConfig::pe_init_std));
    t.emplace_back("model.generator_output",
                   enum_entry<ModelConfig, model::GeneratorOutput>(
                       "sigmoid | linear_clamped", &RunConfig::model, &ModelConfig::generator_output,
                       model::generator_output_from_string, model::to_string));
    t.emplace_back("model.discriminator_output",
                   enum_entry<ModelConfig, model::DiscriminatorOutput>(
                       "sigmoid | linear", &RunConfig::model, &ModelConfig::discriminator_output,
                       model::discriminator_output_from_string, model::to_string));

    t.emplace_back("train.epochs", size_entry("training epochs", &RunConfig::train, &TrainConfig::epochs));
    t.emplace_back("train.batch_size", size_entry("minibatch size", &RunConfig::train, &TrainConfig::batch_size));
    t.emplace_back("train.lambda", real_entry("gradient penalty weight", &RunConfig::train, &TrainConfig::lambda));
    t.emplace_back("train.d_steps_per_g_step", size_entry("critic updates per generator update", &RunConfig::train,
                                                          &TrainConfig::d_steps_per_g_step));
    t.emplace_back("train.generator_optimizer",
                   enum_entry<TrainConfig, num::OptimizerKind>("sgd | adam", &RunConfig::train,
                                                               &TrainConfig::generator_optimizer,
                                                               num::optimizer_kind_from_string, num::to_string));
    t.emplace_back("train.generator_lr",
                   real_entry("generator learning rate", &RunConfig::train, &TrainConfig::generator_lr));
    t.emplace_back("train.discriminator_optimizer",
                   enum_entry<TrainConfig, num::OptimizerKind>("sgd | adam", &RunConfig::train,
                                                               &TrainConfig::discriminator_optimizer,
                                                               num::optimizer_kind_from_string, num::to_string));
    t.emplace_back("train.discriminator_lr",
                   real_entry("discriminator learning rate", &RunConfig::train, &TrainConfig::discriminator_lr));
    t.emplace_back("train.checkpoint_interval", size_entry("epochs between checkpoints", &RunConfig::train,
                                                           &TrainConfig::checkpoint_interval));
    t.emplace_back("train.eval_interval", size_entry("epochs between spread evaluations, 0 = off", &RunConfig::train,
                                                     &TrainConfig::eval_interval));
    t.emplace_back("train.critic_mode",
                   enum_entry<TrainConfig, training::CriticMode>("paper | wgan", &RunConfig::train,
                                                                 &TrainConfig::critic_mode,
                                                                 training::critic_mode_from_string, training::to_string));
    t.emplace_back("train.condition_pairing",
                   enum_entry<TrainConfig, training::ConditionPairing>(
                       "resample | paired", &RunConfig::train, &TrainConfig::condition_pairing,
                       training::condition_pairing_from_string, training::to_string));
    t.emplace_back("train.divergence_threshold", real_entry("abort when |critic objective| exceeds this",
                                                            &RunConfig::train, &TrainConfig::divergence_threshold));

    t.emplace_back("metrics.delay_bin", real_entry("PDAP delay bin width, s", &RunConfig::grid, &PdapConfig::delay_bin));
    t.emplace_back("metrics.delay_bins", size_entry("PDAP delay bins", &RunConfig::grid, &PdapConfig::delay_bins));
    t.emplace_back("metrics.angle_bin", real_entry("PDAP angle bin width, deg", &RunConfig::grid, &PdapConfig::angle_bin));
    t.emplace_back("metrics.angle_bins", size_entry("PDAP angle bins", &RunConfig::grid, &PdapConfig::angle_bins));
    t.emplace_back("metrics.angle_min", real_entry("left edge of the first angle bin, deg", &RunConfig::grid,
                                                   &PdapConfig::angle_min));
    t.emplace_back("metrics.floor_db", real_entry("PDAP floor, dB", &RunConfig::grid, &PdapConfig::floor_db));
    t.emplace_back("metrics.pair_tolerance",
                   Entry{"max distance gap for SSIM pairs, m",
                         [](RunConfig& c, const std::string& k, const std::string& v) {
                           c.pair_tolerance = parse_real(k, v);
                         },
                         [](const RunConfig& c) { return channel::format_real(c.pair_tolerance); }});
    return t;
  }();
  return t;
}

const Entry& lookup(const std::string& key) {
  static const std::map<std::string, const Entry*> index = [] {
    std::map<std::string, const Entry*> m;
    for (const auto& [name, entry] : table()) m.emplace(name, &entry);
    return m;
  }();
  auto it = index.find(key);
  if (it == index.end()) throw ConfigError("unknown config key '" + key + "'");
  return *it->second;
}

}  // namespace

RunConfig RunConfig::desk_defaults() {
  RunConfig c;
  c.model.encoder.num_layers = 2;
  return c;
}

RunConfig RunConfig::resolved() const {
  RunConfig c = *this;
  c.dataset.seed = seed;
  c.train.seed = seed;
  return c;
}

void RunConfig::set(const std::string& key, const std::string& value) { lookup(key).set(*this, key, trim(value)); }

std::string RunConfig::get(const std::string& key) const { return lookup(key).get(*this); }

void RunConfig::validate() const {
  const RunConfig r = resolved();
  r.dataset.validate();
  r.model.validate();
  r.train.validate();
  r.grid.validate();
  if (!(pair_tolerance >= 0.0)) throw ConfigError("metrics.pair_tolerance must be >= 0");
  if (out_dir.empty()) throw ConfigError("paths.out_dir must not be empty");
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const auto& [name, entry] : table()) k.push_back({name, entry.help});
    return k;
  }();
  return keys;
}

RunConfig parse_run_config(std::istream& in, RunConfig base) {
  std::set<std::string> seen;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(number, "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    if (!seen.insert(key).second) throw ParseError(number, "key '" + key + "' given twice");
    try {
      base.set(key, body.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ParseError(number, e.what());
    }
  }
  return base;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return parse_run_config(in, std::move(base));
  } catch (const ParseError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_run_config(std::ostream& out, const RunConfig& config) {
  out << "# thzgan resolved configuration\n";
  for (const auto& [name, entry] : table()) {
    out << "# " << entry.help << '\n' << name << " = " << entry.get(config) << '\n';
  }
}

}  // namespace thzgan::cli
