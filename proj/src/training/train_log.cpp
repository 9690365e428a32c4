#include "thzgan/training/train_log.hpp"

#include <cmath>
#include <ostream>

#include "thzgan/channel/dataset_io.hpp"

namespace thzgan::training {

using channel::format_real;

double EvalRecord::delay_gap() const { return std::abs(gen_delay_spread - real_delay_spread) / real_delay_spread; }

double EvalRecord::angular_gap() const {
  return std::abs(gen_angular_spread - real_angular_spread) / real_angular_spread;
}

void write_iteration_header(std::ostream& out) {
  out << "iteration,epoch,d_loss,penalty,d_real,d_fake,d_grad_norm,g_loss,g_grad_norm,elapsed_s\n";
}

void write_iteration_row(std::ostream& out, const IterationRecord& r) {
  out << r.iteration << ',' << r.epoch << ',' << format_real(r.d_loss) << ',' << format_real(r.penalty) << ','
      << format_real(r.d_real) << ',' << format_real(r.d_fake) << ',' << format_real(r.d_grad_norm) << ',';
  if (r.generator_updated) out << format_real(r.g_loss) << ',' << format_real(r.g_grad_norm);
  else out << ',';
  out << ',' << format_real(r.elapsed_s) << '\n';
}

void write_eval_header(std::ostream& out) {
  out << "epoch,iteration,real_delay_spread_s,gen_delay_spread_s,delay_gap,real_angular_spread_deg,"
         "gen_angular_spread_deg,angular_gap,elapsed_s\n";
}

void write_eval_row(std::ostream& out, const EvalRecord& r) {
  out << r.epoch << ',' << r.iteration << ',' << format_real(r.real_delay_spread) << ','
      << format_real(r.gen_delay_spread) << ',' << format_real(r.delay_gap()) << ','
      << format_real(r.real_angular_spread) << ',' << format_real(r.gen_angular_spread) << ','
      << format_real(r.angular_gap()) << ',' << format_real(r.elapsed_s) << '\n';
}

namespace {

std::ofstream open_log(const std::filesystem::path& path, bool append, void (*header)(std::ostream&)) {
  const bool fresh = !append || !std::filesystem::exists(path);
  std::ofstream out(path, fresh ? std::ios::trunc : std::ios::app);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  if (fresh) header(out);
  return out;
}

}  // namespace

TrainLogWriter::TrainLogWriter(const std::filesystem::path& dir, bool append)
    : iterations_(open_log(dir / "trainlog.csv", append, write_iteration_header)),
      evaluations_(open_log(dir / "evallog.csv", append, write_eval_header)) {}

void TrainLogWriter::iteration(const IterationRecord& r) { write_iteration_row(iterations_, r); }

void TrainLogWriter::evaluation(const EvalRecord& r) {
  write_eval_row(evaluations_, r);
  evaluations_.flush();
}

void TrainLogWriter::flush() {
  iterations_.flush();
  evaluations_.flush();
}

}  // namespace thzgan::training
