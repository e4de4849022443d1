#pragma once

#include <string>
#include <vector>

#include "tgrip/runner.hpp"

namespace tgrip {

// Single-line compact JSON with a fixed key order; one report per line is
// the on-disk and on-pipe representation everywhere.
std::string report_to_json(const RunReport& report);
RunReport report_from_json(const std::string& json_text);

// Every nonempty line of `text` must be one serialized report.
std::vector<RunReport> reports_from_lines(const std::string& text);

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;  // population (divide by n)
};

struct AggregateRow {
  std::string scenario;
  std::size_t runs = 0;
  Stat duration_s;
  Stat compression_pct;
  Stat slip_count;
};

// Groups by scenario label, sorted by name. Values are sorted before
// summing so the result does not depend on input order.
std::vector<AggregateRow> aggregate(const std::vector<RunReport>& reports);

// Fixed-width table, one row per scenario, "mean ± std" with two decimals.
std::string format_table(const std::vector<AggregateRow>& rows);

}  // namespace tgrip
