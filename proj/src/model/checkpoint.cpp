#include "thzgan/model/checkpoint.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "thzgan/channel/dataset_io.hpp"
#include "thzgan/errors.hpp"

namespace thzgan::model {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'T', 'H', 'Z', 'G', 'A', 'N', 'C', 'K'};
constexpr char kTrailer[9] = {'T', 'H', 'Z', 'G', 'A', 'N', 'E', 'N', 'D'};
constexpr std::uint64_t kMaxLength = std::uint64_t{1} << 40;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void bytes(const void* data, std::size_t n) { out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n)); }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void f64(double v) { bytes(&v, sizeof v); }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
  void reals(const std::vector<double>& v) {
    u64(v.size());
    bytes(v.data(), v.size() * sizeof(double));
  }
  void pairs(const std::map<std::string, std::string>& m) {
    u64(m.size());
    for (const auto& [k, v] : m) {
      str(k);
      str(v);
    }
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  void bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw ValidationError("checkpoint is truncated");
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    bytes(&v, sizeof v);
    return v;
  }
  std::uint64_t length() {
    const auto n = u64();
    if (n > kMaxLength) throw ValidationError("checkpoint is corrupt (length field " + std::to_string(n) + ")");
    return n;
  }
  double f64() {
    double v = 0.0;
    bytes(&v, sizeof v);
    return v;
  }
  std::string str() {
    std::string s(length(), '\0');
    bytes(s.data(), s.size());
    return s;
  }
  std::vector<double> reals() {
    std::vector<double> v(length());
    bytes(v.data(), v.size() * sizeof(double));
    return v;
  }
  std::map<std::string, std::string> pairs() {
    std::map<std::string, std::string> m;
    const auto n = length();
    for (std::uint64_t i = 0; i < n; ++i) {
      auto k = str();
      m[k] = str();
    }
    return m;
  }

 private:
  std::istream& in_;
};

void write_arrays(Writer& w, const std::vector<NamedArray>& arrays) {
  w.u64(arrays.size());
  for (const auto& a : arrays) {
    w.str(a.name);
    w.u64(a.shape.size());
    for (auto d : a.shape) w.u64(d);
    w.reals(a.values);
  }
}

std::vector<NamedArray> read_arrays(Reader& r) {
  std::vector<NamedArray> arrays(r.length());
  for (auto& a : arrays) {
    a.name = r.str();
    a.shape.resize(r.length());
    for (auto& d : a.shape) d = r.length();
    a.values = r.reals();
    if (num::shape_numel(a.shape) != a.values.size()) {
      throw ValidationError("checkpoint array " + a.name + " has " + std::to_string(a.values.size()) +
                            " values for shape " + num::shape_str(a.shape));
    }
  }
  return arrays;
}

void write_optimizer(Writer& w, const num::OptimizerState& s) {
  w.str(num::to_string(s.kind));
  w.f64(s.learning_rate);
  w.f64(s.beta1);
  w.f64(s.beta2);
  w.f64(s.epsilon);
  w.u64(s.step);
  w.u64(s.m.size());
  for (const auto& m : s.m) w.reals(m);
  w.u64(s.v.size());
  for (const auto& v : s.v) w.reals(v);
}

num::OptimizerState read_optimizer(Reader& r) {
  num::OptimizerState s;
  s.kind = num::optimizer_kind_from_string(r.str());
  s.learning_rate = r.f64();
  s.beta1 = r.f64();
  s.beta2 = r.f64();
  s.epsilon = r.f64();
  s.step = r.u64();
  s.m.resize(r.length());
  for (auto& m : s.m) m = r.reals();
  s.v.resize(r.length());
  for (auto& v : s.v) v = r.reals();
  return s;
}

std::size_t to_size(const std::string& key, const std::string& text) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw ConfigError("bad value for " + key + ": " + text);
  return value;
}

double to_real(const std::string& key, const std::string& text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw ConfigError("bad value for " + key + ": " + text);
  return value;
}

}  // namespace

std::map<std::string, std::string> model_config_entries(const ModelConfig& c) {
  const auto& e = c.encoder;
  return {
      {"model.num_layers", std::to_string(e.num_layers)},
      {"model.num_heads", std::to_string(e.num_heads)},
      {"model.model_dim", std::to_string(e.model_dim)},
      {"model.key_dim", std::to_string(e.key_dim)},
      {"model.value_dim", std::to_string(e.value_dim)},
      {"model.seq_len", std::to_string(e.seq_len)},
      {"model.mpc_dim", std::to_string(e.mpc_dim)},
      {"model.ffn_dim", std::to_string(e.ffn_dim)},
      {"model.noise_dim", std::to_string(c.noise_dim)},
      {"model.head_hidden", std::to_string(c.head_hidden)},
      {"model.pe_init_std", channel::format_real(c.pe_init_std)},
      {"model.generator_output_activation", to_string(c.generator_output)},
      {"model.discriminator_output_activation", to_string(c.discriminator_output)},
  };
}

ModelConfig model_config_from_entries(const std::map<std::string, std::string>& entries) {
  ModelConfig c;
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = entries.find(key);
    if (it == entries.end()) throw ConfigError("missing model setting " + key);
    return it->second;
  };
  auto& e = c.encoder;
  e.num_layers = to_size("model.num_layers", get("model.num_layers"));
  e.num_heads = to_size("model.num_heads", get("model.num_heads"));
  e.model_dim = to_size("model.model_dim", get("model.model_dim"));
  e.key_dim = to_size("model.key_dim", get("model.key_dim"));
  e.value_dim = to_size("model.value_dim", get("model.value_dim"));
  e.seq_len = to_size("model.seq_len", get("model.seq_len"));
  e.mpc_dim = to_size("model.mpc_dim", get("model.mpc_dim"));
  e.ffn_dim = to_size("model.ffn_dim", get("model.ffn_dim"));
  c.noise_dim = to_size("model.noise_dim", get("model.noise_dim"));
  c.head_hidden = to_size("model.head_hidden", get("model.head_hidden"));
  c.pe_init_std = to_real("model.pe_init_std", get("model.pe_init_std"));
  c.generator_output = generator_output_from_string(get("model.generator_output_activation"));
  c.discriminator_output = discriminator_output_from_string(get("model.discriminator_output_activation"));
  c.validate();
  return c;
}

std::vector<NamedArray> snapshot(const ParamSet& params) {
  std::vector<NamedArray> out;
  out.reserve(params.size());
  for (const auto& [name, t] : params.entries()) {
    out.push_back({name, t.shape(), std::vector<double>(t.data().begin(), t.data().end())});
  }
  return out;
}

void restore(const ParamSet& params, const std::vector<NamedArray>& arrays) {
  if (arrays.size() != params.size()) {
    throw ShapeError("checkpoint holds " + std::to_string(arrays.size()) + " arrays, model expects " +
                     std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < arrays.size(); ++i) {
    const auto& [name, tensor] = params.entries()[i];
    const auto& a = arrays[i];
    if (a.name != name || a.shape != tensor.shape()) {
      throw ShapeError("checkpoint array " + a.name + " " + num::shape_str(a.shape) + " does not conform to " + name +
                       " " + num::shape_str(tensor.shape()));
    }
  }
  for (std::size_t i = 0; i < arrays.size(); ++i) {
    Tensor t = params.entries()[i].second;
    auto dst = t.mutable_data();
    std::copy(arrays[i].values.begin(), arrays[i].values.end(), dst.begin());
  }
}

void write_checkpoint(std::ostream& out, const Checkpoint& c) {
  Writer w(out);
  w.bytes(kMagic, sizeof kMagic);
  const std::uint32_t version = kCheckpointVersion;
  w.bytes(&version, sizeof version);
  w.pairs(model_config_entries(c.model));
  for (const auto& r : c.scaler.ranges()) {
    w.f64(r.min);
    w.f64(r.max);
  }
  write_arrays(w, c.generator);
  write_arrays(w, c.discriminator);
  write_optimizer(w, c.generator_optimizer);
  write_optimizer(w, c.discriminator_optimizer);
  w.u64(c.progress.epoch);
  w.u64(c.progress.iteration);
  w.u64(c.progress.generator_steps);
  w.u64(c.progress.pending_d_steps);
  w.u64(c.progress.seed);
  w.pairs(c.extras);
  w.bytes(kTrailer, sizeof kTrailer);
  if (!out) throw std::runtime_error("failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  Reader r(in);
  char magic[sizeof kMagic];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw ValidationError("not a thzgan checkpoint");
  std::uint32_t version = 0;
  r.bytes(&version, sizeof version);
  if (version != kCheckpointVersion) {
    throw ValidationError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint c;
  c.model = model_config_from_entries(r.pairs());
  std::array<channel::FeatureRange, channel::kNumFeatures> ranges;
  for (auto& range : ranges) {
    range.min = r.f64();
    range.max = r.f64();
  }
  c.scaler = channel::Scaler(ranges);
  c.generator = read_arrays(r);
  c.discriminator = read_arrays(r);
  c.generator_optimizer = read_optimizer(r);
  c.discriminator_optimizer = read_optimizer(r);
  c.progress.epoch = r.u64();
  c.progress.iteration = r.u64();
  c.progress.generator_steps = r.u64();
  c.progress.pending_d_steps = r.u64();
  c.progress.seed = r.u64();
  c.extras = r.pairs();
  char trailer[sizeof kTrailer];
  r.bytes(trailer, sizeof trailer);
  if (std::memcmp(trailer, kTrailer, sizeof kTrailer) != 0) throw ValidationError("checkpoint trailer is corrupt");
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_checkpoint(out, checkpoint);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace thzgan::model
