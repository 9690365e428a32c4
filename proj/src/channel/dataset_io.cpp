#include "thzgan/channel/dataset_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string_view>

#include "thzgan/errors.hpp"

namespace thzgan::channel {

namespace {

constexpr std::string_view kDatasetMagic = "# thzgan dataset v";
constexpr std::string_view kScalerMagic = "# thzgan scaler v";

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_real(std::string_view text, std::size_t line) {
  text = trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(line, "malformed number '" + std::string(text) + "'");
  }
  return value;
}

std::size_t parse_count(std::string_view text, std::string_view key, std::size_t line) {
  if (text.substr(0, key.size()) != key) throw ParseError(line, "expected '" + std::string(key) + "'");
  text.remove_prefix(key.size());
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(line, "malformed count '" + std::string(text) + "'");
  }
  return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

std::string format_real(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

void write_dataset(std::ostream& out, std::span<const ChannelSample> samples, std::size_t train_count) {
  if (train_count > samples.size()) throw ContractError("train split larger than the record count");
  out << kDatasetMagic << kDatasetFormatVersion << " records=" << samples.size() << " train=" << train_count << '\n';
  for (const auto& s : samples) {
    out << format_real(s.distance());
    for (const auto& m : s.mpcs()) {
      out << ';' << format_real(m.gain) << ',' << format_real(m.phase) << ',' << format_real(m.delay) << ','
          << format_real(m.aoa);
    }
    out << '\n';
  }
}

ChannelRecords read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing dataset header");
  std::string_view header = trim(line);
  if (header.substr(0, kDatasetMagic.size()) != kDatasetMagic) throw ParseError(1, "not a thzgan dataset file");
  auto fields = split(header.substr(kDatasetMagic.size()), ' ');
  if (fields.size() != 3) throw ParseError(1, "malformed dataset header");
  if (parse_count(fields[0], "", 1) != kDatasetFormatVersion) throw ParseError(1, "unsupported dataset version");
  const std::size_t records = parse_count(fields[1], "records=", 1);
  const std::size_t train = parse_count(fields[2], "train=", 1);
  if (train > records) throw ParseError(1, "train split exceeds record count");

  ChannelRecords result;
  result.train_count = train;
  result.samples.reserve(records);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = trim(line);
    if (text.empty()) continue;
    if (result.samples.size() == records) throw ParseError(line_no, "more records than the header declares");
    auto groups = split(text, ';');
    const double distance = parse_real(groups[0], line_no);
    std::vector<Mpc> mpcs;
    mpcs.reserve(groups.size() - 1);
    for (std::size_t g = 1; g < groups.size(); ++g) {
      auto values = split(groups[g], ',');
      if (values.size() != kMpcFeatures) {
        throw ParseError(line_no, "MPC " + std::to_string(g) + " has " + std::to_string(values.size()) +
                                      " fields, expected " + std::to_string(kMpcFeatures));
      }
      mpcs.push_back({parse_real(values[0], line_no), parse_real(values[1], line_no), parse_real(values[2], line_no),
                      parse_real(values[3], line_no)});
    }
    try {
      result.samples.emplace_back(mpcs, distance);
    } catch (const ValidationError& e) {
      throw ValidationError("record " + std::to_string(result.samples.size() + 1) + " (line " +
                            std::to_string(line_no) + "): " + e.what());
    }
  }
  if (result.samples.size() != records) {
    throw ParseError(line_no, "truncated dataset: header declares " + std::to_string(records) + " records, found " +
                                  std::to_string(result.samples.size()));
  }
  return result;
}

void write_scaler(std::ostream& out, const Scaler& scaler) {
  out << kScalerMagic << kScalerFormatVersion << '\n';
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    const auto name = feature_name(static_cast<Feature>(f));
    out << name << ".min = " << format_real(scaler.ranges()[f].min) << '\n';
    out << name << ".max = " << format_real(scaler.ranges()[f].max) << '\n';
  }
}

Scaler read_scaler(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing scaler header");
  std::string_view header = trim(line);
  if (header.substr(0, kScalerMagic.size()) != kScalerMagic) throw ParseError(1, "not a thzgan scaler file");
  if (parse_count(header.substr(kScalerMagic.size()), "", 1) != kScalerFormatVersion) {
    throw ParseError(1, "unsupported scaler version");
  }
  std::map<std::string, double, std::less<>> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    std::string key(trim(text.substr(0, eq)));
    if (!values.emplace(key, parse_real(text.substr(eq + 1), line_no)).second) {
      throw ParseError(line_no, "duplicate key '" + key + "'");
    }
  }
  std::array<FeatureRange, kNumFeatures> ranges;
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    const auto name = feature_name(static_cast<Feature>(f));
    auto lo = values.find(name + ".min");
    auto hi = values.find(name + ".max");
    if (lo == values.end() || hi == values.end()) throw ParseError(line_no, "scaler is missing " + name);
    ranges[f] = {lo->second, hi->second};
    values.erase(lo);
    values.erase(hi);
  }
  if (!values.empty()) throw ParseError(line_no, "unknown scaler key '" + values.begin()->first + "'");
  return Scaler(ranges);
}

void save_dataset(const std::filesystem::path& path, std::span<const ChannelSample> samples, std::size_t train_count) {
  auto out = open_output(path);
  write_dataset(out, samples, train_count);
}

ChannelRecords load_dataset(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_dataset(in);
}

void save_scaler(const std::filesystem::path& path, const Scaler& scaler) {
  auto out = open_output(path);
  write_scaler(out, scaler);
}

Scaler load_scaler(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_scaler(in);
}

}  // namespace thzgan::channel
