#include "brl/datasets.hpp"

#include <cstring>

#include "brl/rng.hpp"

namespace brl {

const std::vector<double>& newcomb_measurements() {
  // Stigler (1977), Table 5, third series.
  static const std::vector<double> values{
      28, 26, 33, 24, 34, -44, 27, 16, 40, -2,  //
      29, 22, 24, 21, 25, 30,  23, 29, 31, 19,  //
      24, 20, 36, 32, 36, 28,  25, 21, 28, 29,  //
      37, 25, 28, 26, 30, 32,  36, 26, 30, 22,  //
      36, 23, 27, 27, 28, 27,  31, 27, 26, 33,  //
      26, 32, 32, 24, 39, 28,  24, 25, 32, 25,  //
      29, 27, 28, 29, 16, 23};
  return values;
}

const std::vector<PhoneRecord>& belgian_phones() {
  // Rousseeuw & Leroy (1987), Table 2.3.
  static const std::vector<PhoneRecord> records{
      {50, 0.44}, {51, 0.47}, {52, 0.47}, {53, 0.59}, {54, 0.66},  {55, 0.73},
      {56, 0.81}, {57, 0.88}, {58, 1.06}, {59, 1.20}, {60, 1.35},  {61, 1.49},
      {62, 1.61}, {63, 2.12}, {64, 11.9}, {65, 12.4}, {66, 14.2},  {67, 15.9},
      {68, 18.2}, {69, 21.2}, {70, 4.30}, {71, 2.40}, {72, 2.70},  {73, 2.90}};
  return records;
}

AgencyData synthetic_agency(std::uint64_t seed, int n_states) {
  RngStream rng(seed);
  AgencyData data;
  data.n_states = n_states;

  const std::vector<int> base_sizes{222, 40, 117, 46, 83, 61, 150, 35};
  const std::vector<double> slopes{0.95, 1.08, 0.88, 1.02, 0.93, 1.05, 0.9, 1.0};
  const std::vector<double> noise{0.07, 0.11, 0.08, 0.10, 0.09, 0.08, 0.07, 0.10};

  auto make_epoch = [&](std::vector<AgencyCase>& out) {
    for (int s = 0; s < n_states; ++s) {
      const int n = base_sizes[static_cast<size_t>(s % 8)];
      const double slope = slopes[static_cast<size_t>(s % 8)];
      const double sd = noise[static_cast<size_t>(s % 8)];
      for (int i = 0; i < n; ++i) {
        AgencyCase c;
        c.state = s;
        c.x = std::abs(0.8 + 0.35 * rng.normal()) + 0.05;
        const double u = rng.uniform();
        if (u < 0.14) {
          c.type = 1;  // closed agency
          c.y = 0.0;
        } else if (u < 0.28) {
          c.type = 2;  // second contract line
          c.y = 0.55 * slope * c.x + sd * rng.normal();
        } else {
          c.type = 1;
          c.y = slope * c.x + sd * rng.normal();
        }
        out.push_back(c);
      }
    }
  };
  make_epoch(data.prior_epoch);
  make_epoch(data.cases);
  return data;
}

std::uint64_t dataset_checksum(const std::vector<double>& values) {
  std::uint64_t h = 1469598103934665603ULL;
  for (double v : values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffULL;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

namespace {

// Frozen at transcription time; a mismatch means the embedded data changed.
constexpr std::uint64_t kNewcombChecksum = 0x9a1d9e9a287aed29ULL;
constexpr std::uint64_t kPhonesChecksum = 0xbcada7b291d97462ULL;

}  // namespace

void verify_embedded_datasets() {
  if (newcomb_measurements().size() != 66)
    throw ConfigError("embedded newcomb: expected 66 cases");
  if (dataset_checksum(newcomb_measurements()) != kNewcombChecksum)
    throw ConfigError("embedded newcomb: checksum mismatch");

  const auto& phones = belgian_phones();
  if (phones.size() != 24) throw ConfigError("embedded phones: expected 24 cases");
  std::vector<double> flat;
  for (const auto& r : phones) {
    flat.push_back(r.year);
    flat.push_back(r.calls);
  }
  if (dataset_checksum(flat) != kPhonesChecksum)
    throw ConfigError("embedded phones: checksum mismatch");
}

}  // namespace brl
