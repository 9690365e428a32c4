#pragma once

#include <iosfwd>
#include <span>
#include <vector>

namespace thzgan::metrics {

/// Empirical CDF: the i-th smallest of n values carries probability (i+1)/n.
struct CdfTable {
  std::vector<double> values;
  std::vector<double> probabilities;

  // Smallest tabulated value whose probability reaches p.
  double quantile(double p) const;
};

CdfTable cdf(std::span<const double> values);

// CSV with a `value,probability` header.
void write_cdf_csv(std::ostream& out, const CdfTable& table);

}  // namespace thzgan::metrics
