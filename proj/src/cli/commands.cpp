#include "thzgan/cli/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>

#include "thzgan/channel/dataset_io.hpp"
#include "thzgan/dataset/generator.hpp"
#include "thzgan/errors.hpp"
#include "thzgan/metrics/cdf.hpp"
#include "thzgan/metrics/pdap.hpp"
#include "thzgan/metrics/spread.hpp"
#include "thzgan/metrics/ssim.hpp"
#include "thzgan/model/checkpoint.hpp"
#include "thzgan/training/trainer.hpp"

namespace thzgan::cli {

namespace fs = std::filesystem;
using channel::ChannelSample;
using nlohmann::ordered_json;

std::vector<long> pair_by_distance(std::span<const ChannelSample> queries, std::span<const ChannelSample> references,
                                   double tolerance) {
  std::vector<std::size_t> order(references.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return references[a].distance() < references[b].distance(); });
  std::vector<long> pairs;
  pairs.reserve(queries.size());
  for (const auto& q : queries) {
    const double d = q.distance();
    auto hi = std::lower_bound(order.begin(), order.end(), d,
                               [&](std::size_t i, double v) { return references[i].distance() < v; });
    long best = -1;
    double best_gap = tolerance;
    auto consider = [&](std::size_t i) {
      const double gap = std::abs(references[i].distance() - d);
      if (gap < best_gap || (gap == best_gap && (best < 0 || static_cast<long>(i) < best))) {
        best = static_cast<long>(i);
        best_gap = gap;
      }
    };
    if (hi != order.end()) consider(*hi);
    if (hi != order.begin()) {
      // First entry of the run of equal distances just below d.
      auto lo = std::prev(hi);
      const double below = references[*lo].distance();
      while (lo != order.begin() && references[*std::prev(lo)].distance() == below) --lo;
      consider(*lo);
    }
    pairs.push_back(best);
  }
  return pairs;
}

void write_pdap_csv(std::ostream& out, const metrics::PdapGrid& grid) {
  out << "delay_ns\\angle_deg";
  for (std::size_t j = 0; j < grid.cols(); ++j) out << ',' << channel::format_real(grid.angle_at(j));
  out << '\n';
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    out << channel::format_real(grid.delay_at(i) * 1e9);
    for (std::size_t j = 0; j < grid.cols(); ++j) out << ',' << channel::format_real(grid.db_at(i, j));
    out << '\n';
  }
}

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

// Refuses to write over a file the command reads.
void check_not_input(const fs::path& output, std::initializer_list<std::string> inputs) {
  for (const auto& in : inputs) {
    if (!in.empty() && fs::exists(in) && fs::exists(output) && fs::equivalent(in, output)) {
      throw ConfigError("output " + output.string() + " would overwrite input " + in);
    }
  }
}

channel::ChannelRecords load_existing_dataset(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("no ") + what + " dataset given");
  if (!fs::exists(path)) throw ConfigError(std::string(what) + " dataset " + path + " does not exist");
  return channel::load_dataset(path);
}

struct SpreadSummary {
  std::vector<double> delay_ns;
  std::vector<double> angle_deg;
  double mean_delay_ns = 0.0;
  double mean_angle_deg = 0.0;
};

SpreadSummary spreads(std::span<const ChannelSample> samples) {
  SpreadSummary s;
  for (const auto& x : samples) {
    s.delay_ns.push_back(metrics::delay_spread(x) * 1e9);
    s.angle_deg.push_back(metrics::angular_spread(x));
  }
  if (!samples.empty()) {
    const double n = static_cast<double>(samples.size());
    s.mean_delay_ns = std::accumulate(s.delay_ns.begin(), s.delay_ns.end(), 0.0) / n;
    s.mean_angle_deg = std::accumulate(s.angle_deg.begin(), s.angle_deg.end(), 0.0) / n;
  }
  return s;
}

void write_resolved(const RunConfig& config) {
  fs::create_directories(config.out_dir);
  auto out = open_output(fs::path(config.out_dir) / "resolved_config.txt");
  write_run_config(out, config);
}

int cmd_dataset(const RunConfig& config, std::ostream& out) {
  const auto data = dataset::generate_dataset(config.dataset);
  const fs::path dir = config.out_dir;
  std::vector<ChannelSample> all = data.train;
  all.insert(all.end(), data.test.begin(), data.test.end());
  channel::save_dataset(dir / "dataset.txt", all, data.train.size());
  channel::save_scaler(dir / "scaler.txt", data.scaler);

  const auto train = spreads(data.train);
  const auto test = spreads(data.test);
  out << "wrote " << (dir / "dataset.txt").string() << ": " << all.size() << " samples (train " << data.train.size()
      << ", test " << data.test.size() << ")\n";
  out << "train mean delay spread " << train.mean_delay_ns << " ns, mean angular spread " << train.mean_angle_deg
      << " deg\n";
  out << "test  mean delay spread " << test.mean_delay_ns << " ns, mean angular spread " << test.mean_angle_deg
      << " deg\n";
  return kExitOk;
}

int cmd_train(const RunConfig& config, const std::string& resume, std::ostream& out, std::ostream& err) {
  const auto records = load_existing_dataset(config.dataset_path, "training");
  if (records.train_count == 0) throw ConfigError("dataset " + config.dataset_path + " has no training split");
  const auto scaler = channel::Scaler::fit(records.train());
  training::Trainer trainer(config.model, config.train, scaler, records.train());
  if (!resume.empty()) {
    if (!fs::exists(resume)) throw ConfigError("checkpoint " + resume + " does not exist");
    trainer.resume(model::load_checkpoint(resume));
    out << "resumed at epoch " << trainer.progress().epoch << ", iteration " << trainer.progress().iteration << '\n';
  }
  training::TrainOutputs outputs;
  outputs.out_dir = fs::path(config.out_dir);
  outputs.extras["dataset"] = config.dataset_path;
  outputs.quiet = false;
  if (config.train.eval_interval > 0) outputs.reference.assign(records.test().begin(), records.test().end());
  try {
    trainer.run(outputs);
  } catch (const DivergenceError& e) {
    err << "thzgan: training diverged: " << e.what() << "\n  state written to "
        << (fs::path(config.out_dir) / "diverged.bin").string() << '\n';
    return kExitDiverged;
  }
  const auto& log = trainer.log().iterations;
  out << "trained " << trainer.progress().epoch << " epochs, " << trainer.progress().iteration
      << " critic steps, " << trainer.progress().generator_steps << " generator steps\n";
  if (!log.empty()) {
    out << "last critic objective " << log.back().d_loss << ", penalty " << log.back().penalty << ", "
        << log.back().elapsed_s << " s\n";
  }
  out << "final checkpoint " << (fs::path(config.out_dir) / training::checkpoint_name(trainer.progress().epoch)).string()
      << '\n';
  return kExitOk;
}

struct SampleOptions {
  std::size_t count = 0;
  std::optional<double> distance;
  std::optional<double> distance_min;
  std::optional<double> distance_max;
  std::string distances_from;
  std::string output = "generated.txt";
};

int cmd_sample(const RunConfig& config, const SampleOptions& opt, std::ostream& out) {
  if (config.checkpoint_path.empty()) throw ConfigError("sample needs --checkpoint or paths.checkpoint");
  if (!fs::exists(config.checkpoint_path)) throw ConfigError("checkpoint " + config.checkpoint_path + " does not exist");
  const auto ck = model::load_checkpoint(config.checkpoint_path);
  num::Rng init(0);
  model::Generator generator(ck.model, init);
  model::restore(generator.params(), ck.generator);

  std::vector<double> distances;
  if (!opt.distances_from.empty()) {
    const auto ref = load_existing_dataset(opt.distances_from, "reference");
    for (const auto& s : ref.test()) distances.push_back(s.distance());
  } else if (opt.distance) {
    distances.assign(opt.count, *opt.distance);
  } else {
    const auto& range = ck.scaler.range(channel::Feature::distance);
    const double lo = opt.distance_min.value_or(range.min);
    const double hi = opt.distance_max.value_or(range.max);
    if (!(lo <= hi) || !(lo > 0.0)) throw ConfigError("distance range must satisfy 0 < min <= max");
    num::Rng draw(num::derive_seed(config.seed, "sample.distance"));
    for (std::size_t i = 0; i < opt.count; ++i) distances.push_back(draw.uniform(lo, hi));
  }
  for (double d : distances) {
    if (!(d > 0.0) || !std::isfinite(d)) throw ConfigError("distances must be positive and finite");
  }

  num::Rng noise(num::derive_seed(config.seed, "sample.noise"));
  const auto samples = training::sample_channels(generator, ck.scaler, distances, noise);
  const fs::path path = fs::path(config.out_dir) / opt.output;
  check_not_input(path, {config.checkpoint_path, opt.distances_from});
  channel::save_dataset(path, samples, 0);
  out << "wrote " << path.string() << ": " << samples.size() << " generated samples\n";
  return kExitOk;
}

std::span<const ChannelSample> select(const channel::ChannelRecords& r, const std::string& split) {
  if (split == "train") return r.train();
  if (split == "test") return r.test();
  return r.samples;
}

ordered_json grid_json(const metrics::PdapConfig& g) {
  return {{"delay_bin_s", g.delay_bin}, {"delay_bins", g.delay_bins}, {"angle_bin_deg", g.angle_bin},
          {"angle_bins", g.angle_bins}, {"angle_min_deg", g.angle_min}, {"floor_db", g.floor_db}};
}

double relative_gap(double generated, double real) {
  return real == 0.0 ? (generated == 0.0 ? 0.0 : std::numeric_limits<double>::infinity())
                     : std::abs(generated - real) / std::abs(real);
}

int cmd_eval(const RunConfig& config, const std::string& real_path, const std::string& gen_path,
             const std::string& split, std::ostream& out) {
  const auto real_records = load_existing_dataset(real_path, "real");
  const auto gen_records = load_existing_dataset(gen_path, "generated");
  // Generated files carry no training split, so "test" selects all of them.
  const auto real = select(real_records, split);
  const auto gen = select(gen_records, split);
  if (real.empty() || gen.empty()) throw ConfigError("eval needs at least one sample on each side");

  const fs::path dir = config.out_dir;
  const auto real_s = spreads(real);
  const auto gen_s = spreads(gen);
  auto write_cdf = [&](const char* name, const std::vector<double>& values) {
    auto f = open_output(dir / name);
    metrics::write_cdf_csv(f, metrics::cdf(values));
  };
  write_cdf("cdf_delay_real.csv", real_s.delay_ns);
  write_cdf("cdf_delay_gen.csv", gen_s.delay_ns);
  write_cdf("cdf_angle_real.csv", real_s.angle_deg);
  write_cdf("cdf_angle_gen.csv", gen_s.angle_deg);

  const auto real_pdap = metrics::average_pdap(real, config.grid);
  const auto gen_pdap = metrics::average_pdap(gen, config.grid);
  const double rmse = metrics::pdap_rmse(real_pdap, gen_pdap);
  {
    auto f = open_output(dir / "pdap_real.csv");
    write_pdap_csv(f, real_pdap);
    auto g = open_output(dir / "pdap_gen.csv");
    write_pdap_csv(g, gen_pdap);
  }

  const auto pairs = pair_by_distance(gen, real, config.pair_tolerance);
  std::vector<double> ssims;
  std::size_t unpaired = 0;
  for (std::size_t i = 0; i < gen.size(); ++i) {
    if (pairs[i] < 0) {
      ++unpaired;
      continue;
    }
    ssims.push_back(metrics::ssim(metrics::pdap(gen[i], config.grid),
                                  metrics::pdap(real[static_cast<std::size_t>(pairs[i])], config.grid)));
  }
  const auto ssim_table = metrics::cdf(ssims);
  {
    auto f = open_output(dir / "ssim_cdf.csv");
    metrics::write_cdf_csv(f, ssim_table);
  }

  ordered_json ssim_json = {{"pairs", ssims.size()}, {"unpaired", unpaired}};
  if (!ssims.empty()) {
    const double mean = std::accumulate(ssims.begin(), ssims.end(), 0.0) / static_cast<double>(ssims.size());
    const auto above = std::count_if(ssims.begin(), ssims.end(), [](double v) { return v > 0.8; });
    ssim_json["min"] = ssim_table.values.front();
    ssim_json["p10"] = ssim_table.quantile(0.1);
    ssim_json["p20"] = ssim_table.quantile(0.2);
    ssim_json["median"] = ssim_table.quantile(0.5);
    ssim_json["mean"] = mean;
    ssim_json["max"] = ssim_table.values.back();
    ssim_json["fraction_above_0.8"] = static_cast<double>(above) / static_cast<double>(ssims.size());
  } else {
    for (const char* k : {"min", "p10", "p20", "median", "mean", "max", "fraction_above_0.8"}) ssim_json[k] = nullptr;
  }

  auto side = [](const SpreadSummary& s, std::size_t n, const metrics::PdapGrid& g, const std::string& path) {
    return ordered_json{{"path", path},
                        {"count", n},
                        {"mean_delay_spread_ns", s.mean_delay_ns},
                        {"mean_angular_spread_deg", s.mean_angle_deg},
                        {"pdap_clipped_mpcs", g.clipped()}};
  };
  ordered_json summary = {
      {"split", split},
      {"real", side(real_s, real.size(), real_pdap, real_path)},
      {"generated", side(gen_s, gen.size(), gen_pdap, gen_path)},
      {"delay_spread_relative_gap", relative_gap(gen_s.mean_delay_ns, real_s.mean_delay_ns)},
      {"angular_spread_relative_gap", relative_gap(gen_s.mean_angle_deg, real_s.mean_angle_deg)},
      {"pdap_rmse_db", rmse},
      {"ssim", ssim_json},
      {"pair_tolerance_m", config.pair_tolerance},
      {"grid", grid_json(config.grid)},
  };
  {
    auto f = open_output(dir / "summary.json");
    f << summary.dump(2) << '\n';
  }

  out << "real " << real.size() << " / generated " << gen.size() << " samples\n";
  out << "mean delay spread " << real_s.mean_delay_ns << " ns real, " << gen_s.mean_delay_ns << " ns generated ("
      << 100.0 * relative_gap(gen_s.mean_delay_ns, real_s.mean_delay_ns) << "% gap)\n";
  out << "mean angular spread " << real_s.mean_angle_deg << " deg real, " << gen_s.mean_angle_deg
      << " deg generated (" << 100.0 * relative_gap(gen_s.mean_angle_deg, real_s.mean_angle_deg) << "% gap)\n";
  out << "average PDAP RMSE " << rmse << " dB\n";
  if (!ssims.empty()) {
    out << "SSIM over " << ssims.size() << " distance pairs: median " << ssim_table.quantile(0.5) << '\n';
  } else {
    out << "SSIM: no pairs within " << config.pair_tolerance << " m\n";
  }
  out << "wrote " << (dir / "summary.json").string() << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Transformer WGAN-GP generator of THz channel parameters"};
  app.name("thzgan");
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "master seed");
  app.add_option("--out-dir", out_dir, "output directory");
  app.add_option("--set", overrides, "override one config key, as key=value")->allow_extra_args(false);

  auto* dataset_cmd = app.add_subcommand("dataset", "generate a ground-truth dataset and scaler");

  std::string dataset_path, resume;
  auto* train_cmd = app.add_subcommand("train", "train the generator and critic");
  train_cmd->add_option("--dataset", dataset_path, "dataset file (paths.dataset)");
  train_cmd->add_option("--resume", resume, "checkpoint to continue from");

  SampleOptions sample;
  std::string checkpoint_path;
  auto* sample_cmd = app.add_subcommand("sample", "generate channels from a checkpoint");
  sample_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint file (paths.checkpoint)");
  auto* count_opt = sample_cmd->add_option("--count", sample.count, "number of samples");
  auto* dist_opt = sample_cmd->add_option("--distance", sample.distance, "fixed Tx-Rx distance, m");
  auto* min_opt = sample_cmd->add_option("--distance-min", sample.distance_min, "range start, m");
  auto* max_opt = sample_cmd->add_option("--distance-max", sample.distance_max, "range end, m");
  auto* from_opt = sample_cmd->add_option("--distances-from", sample.distances_from,
                                          "use the test-split distances of this dataset file");
  sample_cmd->add_option("--output", sample.output, "file name under the output directory");
  dist_opt->excludes(min_opt)->excludes(max_opt)->excludes(from_opt);
  from_opt->excludes(count_opt)->excludes(min_opt)->excludes(max_opt);

  std::string real_path, gen_path, split = "test";
  auto* eval_cmd = app.add_subcommand("eval", "compare real and generated channels");
  eval_cmd->add_option("--real", real_path, "ground-truth dataset file (paths.dataset)");
  eval_cmd->add_option("--generated", gen_path, "generated dataset file")->required();
  eval_cmd->add_option("--split", split, "records used from each file")
      ->check(CLI::IsMember({"all", "train", "test"}));

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig::desk_defaults() : load_run_config(config_path);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + o + "'");
      config.set(o.substr(0, eq), o.substr(eq + 1));
    }
    if (seed) config.seed = *seed;
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (!dataset_path.empty()) config.dataset_path = dataset_path;
    if (!checkpoint_path.empty()) config.checkpoint_path = checkpoint_path;
    if (eval_cmd->parsed() && real_path.empty()) real_path = config.dataset_path;
    config.validate();
    config = config.resolved();
    write_resolved(config);

    if (dataset_cmd->parsed()) return cmd_dataset(config, out);
    if (train_cmd->parsed()) return cmd_train(config, resume, out, err);
    if (sample_cmd->parsed()) return cmd_sample(config, sample, out);
    return cmd_eval(config, real_path, gen_path, split, out);
  } catch (const std::exception& e) {
    err << "thzgan: error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace thzgan::cli
