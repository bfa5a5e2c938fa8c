#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brl/types.hpp"

namespace brl {

/// Newcomb's 66 passage-time measurements (Stigler 1977), recorded as
/// deviations from 24800 nanoseconds in units of 10^-3 microseconds.
const std::vector<double>& newcomb_measurements();

struct PhoneRecord {
  double year;   // 50 .. 73
  double calls;  // tens of millions of calls
};

/// Yearly number of telephone calls in Belgium, 1950-1973 (Rousseeuw & Leroy
/// 1987). Calls for 1964-1969 and parts of 1963/1970 were recorded in the
/// wrong unit, producing the famous outlier block.
const std::vector<PhoneRecord>& belgian_phones();

/// Synthetic stand-in for the proprietary agency-performance data: per-state
/// regression lines through sqrt-scale counts, a closed-agency mass at zero,
/// and a second contract-type line. Never presented as the original data.
struct AgencyCase {
  int state = 0;
  double x = 0.0;  // sqrt count, earlier year
  double y = 0.0;  // sqrt count, later year (0 for closed agencies)
  int type = 1;    // contract type
};

struct AgencyData {
  std::vector<AgencyCase> cases;        // analysis epoch
  std::vector<AgencyCase> prior_epoch;  // two years earlier; sets the priors
  int n_states = 0;
};

AgencyData synthetic_agency(std::uint64_t seed = 0x5a17e9c3u, int n_states = 4);

/// FNV-1a checksum over the raw bit patterns.
std::uint64_t dataset_checksum(const std::vector<double>& values);

/// Verify every embedded dataset against its recorded checksum; throws
/// ConfigError on mismatch. Called at CLI startup.
void verify_embedded_datasets();

}  // namespace brl
