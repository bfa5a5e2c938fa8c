#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "brl/evaluation.hpp"
#include "brl/types.hpp"

namespace brl {

struct CsvSchema {
  std::string response;
  std::vector<std::string> design;
  std::string group;  // optional stratum column (read as text)
  bool intercept = false;
};

struct LoadedData {
  Dataset data;
  std::vector<std::string> group_labels;  // empty when no group column
};

/// RFC-style CSV with a header row, '.' decimal, UTF-8. The design is
/// assembled exactly in declared column order, with an optional leading
/// intercept column.
LoadedData load_csv(const std::string& path, const CsvSchema& schema);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Shortest representation that rereads to the same double.
std::string format_double(double v);

/// Flat key-value text with [sections]; lookup keys are "section.key".
/// '#' and ';' start comments.
class KeyValueConfig {
 public:
  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback = "") const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& key) const;
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Schema-stable report rows: (method, group, metric, value, se).
struct ReportRow {
  std::string method;
  std::string group;
  std::string metric;
  double value = 0.0;
  double se = 0.0;
};

void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows);

/// JSON mirror of the CSV content plus the resolved config and seed.
void write_report_json(const std::string& path, const std::vector<ReportRow>& rows,
                       const std::map<std::string, std::string>& config_echo,
                       std::uint64_t seed);

std::vector<ReportRow> report_rows(const KLReport& report, const std::vector<StudyPrior>& priors);
std::vector<ReportRow> report_rows(const TLMReport& report, const std::string& group);

}  // namespace brl
