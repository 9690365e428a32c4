#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "thzgan/channel/channel.hpp"
#include "thzgan/cli/run_config.hpp"
#include "thzgan/metrics/pdap.hpp"

namespace thzgan::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  // bad input, I/O or configuration problem
  kExitUsage = 2,    // command line could not be parsed
  kExitDiverged = 3,
};

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Index of the nearest-distance reference for each query, or -1 when none
/// lies within `tolerance` meters. Ties go to the lower index.
std::vector<long> pair_by_distance(std::span<const channel::ChannelSample> queries,
                                   std::span<const channel::ChannelSample> references, double tolerance);

/// Average PDAP as CSV: a header of angle bin edges, then one row per delay
/// bin led by its edge.
void write_pdap_csv(std::ostream& out, const metrics::PdapGrid& grid);

}  // namespace thzgan::cli
