#include "thzgan/metrics/cdf.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "thzgan/channel/dataset_io.hpp"
#include "thzgan/errors.hpp"

namespace thzgan::metrics {

CdfTable cdf(std::span<const double> values) {
  CdfTable table;
  table.values.assign(values.begin(), values.end());
  for (double v : table.values) {
    if (std::isnan(v)) throw DomainError("cdf of a NaN value");
  }
  std::sort(table.values.begin(), table.values.end());
  const double n = static_cast<double>(table.values.size());
  table.probabilities.resize(table.values.size());
  for (std::size_t i = 0; i < table.values.size(); ++i) table.probabilities[i] = static_cast<double>(i + 1) / n;
  return table;
}

double CdfTable::quantile(double p) const {
  if (values.empty()) throw DomainError("quantile of an empty table");
  auto it = std::lower_bound(probabilities.begin(), probabilities.end(), p);
  if (it == probabilities.end()) return values.back();
  return values[static_cast<std::size_t>(it - probabilities.begin())];
}

void write_cdf_csv(std::ostream& out, const CdfTable& table) {
  out << "value,probability\n";
  for (std::size_t i = 0; i < table.values.size(); ++i) {
    out << channel::format_real(table.values[i]) << ',' << channel::format_real(table.probabilities[i]) << '\n';
  }
}

}  // namespace thzgan::metrics
