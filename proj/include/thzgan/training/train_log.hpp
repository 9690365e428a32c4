#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <vector>

namespace thzgan::training {

struct IterationRecord {
  std::uint64_t iteration = 0;  // discriminator step index, from 1
  std::uint64_t epoch = 0;      // from 1
  double d_loss = 0.0;
  double penalty = 0.0;
  double d_real = 0.0;
  double d_fake = 0.0;
  double d_grad_norm = 0.0;
  bool generator_updated = false;
  double g_loss = 0.0;
  double g_grad_norm = 0.0;
  double elapsed_s = 0.0;
};

struct EvalRecord {
  std::uint64_t epoch = 0;
  std::uint64_t iteration = 0;
  double real_delay_spread = 0.0;  // mean, s
  double gen_delay_spread = 0.0;
  double real_angular_spread = 0.0;  // mean, deg
  double gen_angular_spread = 0.0;
  double elapsed_s = 0.0;

  double delay_gap() const;    // |gen - real| / real
  double angular_gap() const;
};

/// Append-only record of a training run.
struct TrainLog {
  std::vector<IterationRecord> iterations;
  std::vector<EvalRecord> evaluations;
};

void write_iteration_header(std::ostream& out);
void write_iteration_row(std::ostream& out, const IterationRecord& r);
void write_eval_header(std::ostream& out);
void write_eval_row(std::ostream& out, const EvalRecord& r);

/// Streams records to `trainlog.csv` and `evallog.csv` as they arrive.
/// A fresh run truncates the files; a resumed run appends to them.
class TrainLogWriter {
 public:
  TrainLogWriter(const std::filesystem::path& dir, bool append);
  void iteration(const IterationRecord& r);
  void evaluation(const EvalRecord& r);
  void flush();

 private:
  std::ofstream iterations_;
  std::ofstream evaluations_;
};

}  // namespace thzgan::training
