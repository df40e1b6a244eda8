#include "vetl/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "vetl/util.hpp"

namespace vetl::report {

using json = nlohmann::json;
namespace fs = std::filesystem;

RunData load_run(const std::string& dir) {
  RunData run;
  run.dir = dir;
  fs::path trace = fs::path(dir) / "trace.jsonl";
  fs::path metrics = fs::path(dir) / "metrics.json";
  if (!fs::exists(trace)) throw ReportError(dir + ": missing trace.jsonl");
  if (!fs::exists(metrics)) throw ReportError(dir + ": missing metrics.json");
  std::ifstream in(trace, std::ios::binary);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      run.trace.push_back(explore::step_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw ReportError(trace.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  try {
    auto m = json::parse(read_file(metrics.string()));
    run.variant = m.at("variant").get<std::string>();
    run.seed = m.value("seed", std::uint64_t{0});
    run.budget = m.value("budget", 0);
    run.actions = m.at("actions").get<int>();
    for (const auto& s : m.at("visited_states")) run.visited_states.insert(s.get<std::string>());
    for (const auto& k : m.at("discovered_actions")) run.discovered_actions.insert(k.get<std::string>());
    run.failures = static_cast<int>(m.at("failures").size());
    run.model_queries = m.value("model_queries", 0);
    run.wall_time_s = m.value("wall_time_s", 0.0);
    for (const auto& p : m.at("curve")) run.curve.push_back({p.at(0).get<int>(), p.at(1).get<int>(), p.at(2).get<int>()});
  } catch (const json::exception& e) {
    throw ReportError(metrics.string() + ": " + e.what());
  }
  return run;
}

std::set<std::string> fold_states(const std::vector<explore::StepRecord>& trace) {
  std::set<std::string> states;
  for (const auto& r : trace) {
    states.insert(explore::normalize_url(r.url_before));
    states.insert(explore::normalize_url(r.url_after));
  }
  return states;
}

Verification verify_run(const RunData& run) {
  Verification v;
  auto fail = [&](std::string msg) {
    v.ok = false;
    v.problems.push_back(std::move(msg));
  };
  auto folded = fold_states(run.trace);
  if (folded != run.visited_states) {
    fail("visited_states holds " + std::to_string(run.visited_states.size()) + " URLs but the trace names " +
         std::to_string(folded.size()));
  }
  if (static_cast<int>(run.trace.size()) != run.actions) {
    fail("trace has " + std::to_string(run.trace.size()) + " records but metrics count " +
         std::to_string(run.actions) + " actions");
  }
  if (run.budget > 0 && run.actions > run.budget) fail("actions exceed the budget");
  if (run.curve.size() != run.trace.size()) fail("curve length differs from trace length");
  for (std::size_t i = 0; i < run.curve.size(); ++i) {
    const auto& p = run.curve[i];
    if (p.actions != static_cast<int>(i) + 1) fail("curve point " + std::to_string(i) + " has the wrong action count");
    if (i > 0 && (p.states < run.curve[i - 1].states || p.discovered < run.curve[i - 1].discovered)) {
      fail("curve decreases at point " + std::to_string(i));
    }
  }
  if (!run.curve.empty()) {
    if (run.curve.back().states != static_cast<int>(run.visited_states.size())) {
      fail("final curve state count differs from visited_states");
    }
    if (run.curve.back().discovered > static_cast<int>(run.discovered_actions.size())) {
      fail("curve reports more discovered actions than metrics");
    }
  }
  for (const auto& r : run.trace) {
    if (r.step_index < 0 || static_cast<std::size_t>(r.step_index) >= run.trace.size()) fail("bad step index");
    if (r.action != explore::ActionKind::click) continue;
    std::set<dom::ElementKey> cands(r.candidates.begin(), r.candidates.end());
    for (const auto& k : r.interested) {
      if (!cands.contains(k)) fail("step " + std::to_string(r.step_index) + ": interested element outside candidates");
    }
    if (!cands.contains(r.element)) fail("step " + std::to_string(r.step_index) + ": target outside candidates");
  }
  return v;
}

Summary summarize(const std::vector<RunData>& runs, const std::string& baseline) {
  Summary s;
  std::set<std::string> all_states, all_actions;
  for (const auto& r : runs) {
    all_states.insert(r.visited_states.begin(), r.visited_states.end());
    all_actions.insert(r.discovered_actions.begin(), r.discovered_actions.end());
  }
  s.union_states = all_states.size();
  s.union_actions = all_actions.size();
  auto ratio = [](double a, std::size_t b) { return b == 0 ? 0.0 : a / static_cast<double>(b); };

  std::vector<std::string> order;
  std::map<std::string, std::vector<Row>> groups;
  for (const auto& r : runs) {
    Row row;
    row.label = r.dir;
    row.visited_states = static_cast<double>(r.visited_states.size());
    row.discovered_actions = static_cast<double>(r.discovered_actions.size());
    row.failures = r.failures;
    row.model_queries = r.model_queries;
    row.wall_time_s = r.wall_time_s;
    row.coverage_states = ratio(row.visited_states, s.union_states);
    row.coverage_actions = ratio(row.discovered_actions, s.union_actions);
    if (!groups.contains(r.variant)) order.push_back(r.variant);
    groups[r.variant].push_back(row);
    s.runs.push_back(row);
  }
  for (const auto& label : order) {
    const auto& rows = groups[label];
    Row mean;
    mean.label = label;
    mean.mean = true;
    mean.runs = static_cast<int>(rows.size());
    for (const auto& r : rows) {
      mean.visited_states += r.visited_states;
      mean.discovered_actions += r.discovered_actions;
      mean.failures += r.failures;
      mean.model_queries += r.model_queries;
      mean.wall_time_s += r.wall_time_s;
      mean.coverage_states += r.coverage_states;
      mean.coverage_actions += r.coverage_actions;
    }
    double n = static_cast<double>(rows.size());
    for (double* f : {&mean.visited_states, &mean.discovered_actions, &mean.failures, &mean.model_queries,
                      &mean.wall_time_s, &mean.coverage_states, &mean.coverage_actions}) {
      *f /= n;
    }
    s.groups.push_back(mean);
  }
  s.baseline = baseline.empty() && !order.empty() ? order.front() : baseline;
  const Row* base = nullptr;
  for (const auto& g : s.groups) {
    if (g.label == s.baseline) base = &g;
  }
  if (!base && !s.groups.empty()) throw ReportError("no runs of baseline variant " + s.baseline);
  if (base) {
    Row b = *base;
    auto gain = [](double a, double bv) { return bv == 0 ? 0.0 : (a - bv) / bv; };
    for (auto& g : s.groups) {
      g.gain_states = gain(g.visited_states, b.visited_states);
      g.gain_actions = gain(g.discovered_actions, b.discovered_actions);
    }
  }
  return s;
}

Summary summarize(const std::vector<std::string>& dirs, const std::string& baseline) {
  std::vector<RunData> runs;
  for (const auto& d : dirs) runs.push_back(load_run(d));
  return summarize(runs, baseline);
}

namespace {
std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s = buf;
  while (s.size() > 1 && s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  return "\"" + replace_all(s, "\"", "\"\"") + "\"";
}
}  // namespace

std::string to_csv(const Summary& s) {
  std::ostringstream out;
  out << "kind,label,runs,visited_states,discovered_actions,failures,model_queries,wall_time_s,"
         "gain_states,gain_actions,coverage_states,coverage_actions\n";
  auto emit = [&](const Row& r) {
    out << (r.mean ? "mean" : "run") << ',' << csv_field(r.label) << ',' << r.runs << ',' << num(r.visited_states)
        << ',' << num(r.discovered_actions) << ',' << num(r.failures) << ',' << num(r.model_queries) << ','
        << num(r.wall_time_s) << ',' << (r.mean ? num(r.gain_states) : "") << ','
        << (r.mean ? num(r.gain_actions) : "") << ',' << num(r.coverage_states) << ',' << num(r.coverage_actions)
        << '\n';
  };
  for (const auto& r : s.runs) emit(r);
  for (const auto& r : s.groups) emit(r);
  return out.str();
}

std::string to_text(const Summary& s) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %5s %10s %10s %9s %8s %9s %9s\n", "variant", "runs", "states", "actions",
                "failures", "queries", "gain(st)", "coverage");
  out << line;
  for (const auto& g : s.groups) {
    std::snprintf(line, sizeof line, "%-10s %5d %10.2f %10.2f %9.2f %8.2f %8.1f%% %9.3f\n", g.label.c_str(), g.runs,
                  g.visited_states, g.discovered_actions, g.failures, g.model_queries, g.gain_states * 100,
                  g.coverage_states);
    out << line;
  }
  out << "baseline: " << s.baseline << "; union of states " << s.union_states << ", of actions " << s.union_actions
      << "\n";
  return out.str();
}

std::string curve_csv(const RunData& run) {
  std::string out = "actions,states,actions_discovered\n";
  for (const auto& p : run.curve) {
    out += std::to_string(p.actions) + "," + std::to_string(p.states) + "," + std::to_string(p.discovered) + "\n";
  }
  return out;
}

}  // namespace vetl::report
