#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "vetl/explorer.hpp"

namespace vetl::report {

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunData {
  std::string dir;
  std::string variant;
  std::uint64_t seed = 0;
  int budget = 0;
  std::vector<explore::StepRecord> trace;
  std::set<std::string> visited_states;      // from metrics.json
  std::set<std::string> discovered_actions;  // from metrics.json
  std::vector<explore::CurvePoint> curve;
  int failures = 0;
  int model_queries = 0;
  int actions = 0;
  double wall_time_s = 0;
};

/// Reads trace.jsonl and metrics.json; throws ReportError when either is
/// missing or malformed.
RunData load_run(const std::string& dir);

struct Verification {
  bool ok = true;
  std::vector<std::string> problems;
};

/// Re-folds the trace and checks it against the stored metrics: state set,
/// curve monotonicity and length, action accounting, E_I within E_C.
Verification verify_run(const RunData& run);
inline Verification verify_run(const std::string& dir) { return verify_run(load_run(dir)); }

/// Distinct normalized URLs mentioned by the trace.
std::set<std::string> fold_states(const std::vector<explore::StepRecord>& trace);

struct Row {
  std::string label;  // variant, or the run directory for per-run rows
  bool mean = false;  // averaged over `runs`
  int runs = 1;
  double visited_states = 0;
  double discovered_actions = 0;
  double failures = 0;
  double model_queries = 0;
  double wall_time_s = 0;
  double gain_states = 0;  // (a-b)/b against the baseline group
  double gain_actions = 0;
  double coverage_states = 0;  // against the union over all compared runs
  double coverage_actions = 0;
};

struct Summary {
  std::vector<Row> runs;
  std::vector<Row> groups;
  std::string baseline;
  std::size_t union_states = 0;
  std::size_t union_actions = 0;
};

/// Groups runs by variant in order of first appearance. The baseline group
/// defaults to the first one.
Summary summarize(const std::vector<RunData>& runs, const std::string& baseline = "");
Summary summarize(const std::vector<std::string>& dirs, const std::string& baseline = "");

std::string to_csv(const Summary& s);
std::string to_text(const Summary& s);

std::string curve_csv(const RunData& run);

}  // namespace vetl::report
