#include "tgrip/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

namespace tgrip {
namespace {

using ordered_json = nlohmann::ordered_json;

Outcome outcome_from_string(const std::string& s) {
  if (s == "success") return Outcome::Success;
  if (s == "object_lost") return Outcome::ObjectLost;
  if (s == "gripper_exhausted") return Outcome::GripperExhausted;
  if (s == "timeout") return Outcome::Timeout;
  throw ConfigError("unknown outcome '" + s + "'");
}

ManipPhase phase_from_string(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(ManipPhase::Failed); ++i) {
    const auto phase = static_cast<ManipPhase>(i);
    if (s == to_string(phase)) {
      return phase;
    }
  }
  throw ConfigError("unknown phase '" + s + "'");
}

SensorId sensor_from_string(const std::string& s) {
  if (s == "S1") return SensorId::S1;
  if (s == "S2") return SensorId::S2;
  throw ConfigError("unknown sensor '" + s + "'");
}

ChangeKind kind_from_string(const std::string& s) {
  if (s == "touch") return ChangeKind::Touch;
  if (s == "slip") return ChangeKind::Slip;
  throw ConfigError("unknown event kind '" + s + "'");
}

Stat stat_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) {
    sum += v;
  }
  const double mean = sum / n;
  double sq = 0.0;
  for (double v : values) {
    sq += (v - mean) * (v - mean);
  }
  return Stat{mean, std::sqrt(sq / n)};
}

std::string format_pm(const Stat& s) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f ± %.2f", s.mean, s.stddev);
  return buf;
}

}  // namespace

std::string report_to_json(const RunReport& report) {
  ordered_json j;
  j["schema"] = RunReport::kSchema;
  j["scenario"] = report.scenario;
  j["seed"] = report.seed;
  j["outcome"] = to_string(report.outcome);
  j["damaged"] = report.damaged;
  j["duration_steps"] = report.duration_steps;
  j["duration_s"] = report.duration_s;
  j["width_at_touch_m"] = report.width_at_touch_m;
  j["final_width_m"] = report.final_width_m;
  j["compression_pct"] = report.compression_pct;
  j["slip_count"] = report.slip_count;
  ordered_json trace = ordered_json::array();
  for (const TraceEntry& e : report.trace) {
    trace.push_back({{"step", e.step}, {"phase", to_string(e.phase)}});
  }
  j["trace"] = std::move(trace);
  ordered_json events = ordered_json::array();
  for (const DetectionEvent& e : report.events) {
    events.push_back({{"t", e.t},
                      {"sensor", to_string(e.sensor)},
                      {"kind", to_string(e.kind)},
                      {"ratio", e.ratio},
                      {"threshold", e.threshold}});
  }
  j["events"] = std::move(events);
  return j.dump();
}

RunReport report_from_json(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad report JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("schema", "") != RunReport::kSchema) {
    throw ConfigError("not a " + std::string(RunReport::kSchema) +
                      " document");
  }
  RunReport r;
  try {
    r.scenario = j.at("scenario").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.outcome = outcome_from_string(j.at("outcome").get<std::string>());
    r.damaged = j.at("damaged").get<bool>();
    r.duration_steps = j.at("duration_steps").get<std::uint32_t>();
    r.duration_s = j.at("duration_s").get<double>();
    r.width_at_touch_m = j.at("width_at_touch_m").get<double>();
    r.final_width_m = j.at("final_width_m").get<double>();
    r.compression_pct = j.at("compression_pct").get<double>();
    r.slip_count = j.at("slip_count").get<std::uint32_t>();
    for (const auto& e : j.at("trace")) {
      r.trace.push_back({e.at("step").get<std::uint32_t>(),
                         phase_from_string(e.at("phase").get<std::string>())});
    }
    for (const auto& e : j.at("events")) {
      r.events.push_back({sensor_from_string(e.at("sensor").get<std::string>()),
                          e.at("t").get<std::uint32_t>(),
                          kind_from_string(e.at("kind").get<std::string>()),
                          e.at("ratio").get<double>(),
                          e.at("threshold").get<double>()});
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad report JSON: ") + e.what());
  }
  return r;
}

std::vector<RunReport> reports_from_lines(const std::string& text) {
  std::vector<RunReport> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    out.push_back(report_from_json(line));
  }
  return out;
}

std::vector<AggregateRow> aggregate(const std::vector<RunReport>& reports) {
  std::map<std::string, std::vector<const RunReport*>> groups;
  for (const RunReport& r : reports) {
    groups[r.scenario].push_back(&r);
  }
  std::vector<AggregateRow> rows;
  for (const auto& [name, runs] : groups) {
    AggregateRow row;
    row.scenario = name;
    row.runs = runs.size();
    std::vector<double> duration, compression, slips;
    for (const RunReport* r : runs) {
      duration.push_back(r->duration_s);
      compression.push_back(r->compression_pct);
      slips.push_back(static_cast<double>(r->slip_count));
    }
    row.duration_s = stat_of(std::move(duration));
    row.compression_pct = stat_of(std::move(compression));
    row.slip_count = stat_of(std::move(slips));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_table(const std::vector<AggregateRow>& rows) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-18s %-16s %-16s %-16s %s\n",
                "Experiment", "Duration [s]", "% Compression", "# Slippages",
                "Runs");
  out << line;
  for (const AggregateRow& row : rows) {
    std::snprintf(line, sizeof(line), "%-18s %-16s %-16s %-16s %zu\n",
                  row.scenario.c_str(), format_pm(row.duration_s).c_str(),
                  format_pm(row.compression_pct).c_str(),
                  format_pm(row.slip_count).c_str(), row.runs);
    out << line;
  }
  return out.str();
}

}  // namespace tgrip
