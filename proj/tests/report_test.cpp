#include <gtest/gtest.h>

#include <filesystem>
#include <json.hpp>

#include "test_support.hpp"
#include "vetl/report.hpp"
#include "vetl/util.hpp"

using namespace vetl;
using namespace vetl::report;
using vetl::testing_support::scratch;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// A run whose trace walks through `urls` with one click per hop.
std::string make_run(const fs::path& root, const std::string& name, const std::string& variant,
                     const std::vector<std::string>& urls, int discovered) {
  fs::path dir = root / name;
  fs::create_directories(dir);
  std::string trace;
  std::set<std::string> states;
  json curve = json::array();
  for (std::size_t i = 0; i + 1 < urls.size(); ++i) {
    explore::StepRecord r;
    r.step_index = static_cast<int>(i);
    r.element = {"a:" + std::to_string(i)};
    r.url_before = urls[i];
    r.url_after = urls[i + 1];
    r.reward = 0;
    r.branch = bandit::Branch::explore;
    r.candidates = {r.element};
    trace += explore::to_json(r).dump() + "\n";
    states.insert(explore::normalize_url(urls[i]));
    states.insert(explore::normalize_url(urls[i + 1]));
    curve.push_back({static_cast<int>(i) + 1, static_cast<int>(states.size()), discovered});
  }
  json keys = json::array();
  for (int i = 0; i < discovered; ++i) keys.push_back(name + std::to_string(i));
  json metrics{{"variant", variant}, {"seed", 0}, {"budget", 100}, {"actions", urls.size() - 1},
               {"visited_states", states}, {"discovered_actions", keys}, {"failures", json::array()},
               {"model_queries", 4}, {"wall_time_s", 1.5}, {"curve", curve}};
  write_file((dir / "trace.jsonl").string(), trace);
  write_file((dir / "metrics.json").string(), metrics.dump());
  return dir.string();
}

}  // namespace

TEST(Report, SingleRunAverageIsItself) {
  auto root = scratch("report_single");
  auto d = make_run(root, "r1", "vetl", {"http://h/a", "http://h/b", "http://h/c"}, 7);
  auto s = summarize(std::vector<std::string>{d});
  ASSERT_EQ(s.groups.size(), 1u);
  EXPECT_EQ(s.groups[0].visited_states, 3);
  EXPECT_EQ(s.groups[0].discovered_actions, 7);
  EXPECT_EQ(s.groups[0].gain_states, 0);
  EXPECT_EQ(s.groups[0].coverage_states, 1.0);
}

TEST(Report, MeanOverRepetitions) {
  auto root = scratch("report_mean");
  std::vector<std::string> dirs;
  std::vector<std::vector<std::string>> walks = {
      {"http://h/a", "http://h/b"}, {"http://h/a", "http://h/b", "http://h/c"}, {"http://h/a", "http://h/b", "http://h/c", "http://h/d"},
      {"http://h/a", "http://h/a"}, {"http://h/a", "http://h/e", "http://h/f", "http://h/g", "http://h/h"}};
  double sum = 0;
  for (std::size_t i = 0; i < walks.size(); ++i) {
    dirs.push_back(make_run(root, "r" + std::to_string(i), "vetl", walks[i], 10));
    sum += static_cast<double>(std::set<std::string>(walks[i].begin(), walks[i].end()).size());
  }
  auto s = summarize(dirs);
  ASSERT_EQ(s.groups.size(), 1u);
  EXPECT_EQ(s.groups[0].runs, 5);
  EXPECT_DOUBLE_EQ(s.groups[0].visited_states, sum / 5);
  EXPECT_EQ(s.runs.size(), 5u);
  EXPECT_EQ(s.union_states, 8u);
}

TEST(Report, RelativeGainBetweenVariants) {
  auto root = scratch("report_gain");
  std::vector<std::string> urls_a, urls_b;
  for (int i = 0; i < 5; ++i) urls_a.push_back("http://h/" + std::to_string(i));
  for (int i = 0; i < 4; ++i) urls_b.push_back("http://h/" + std::to_string(i));
  auto b = make_run(root, "base", "random", urls_b, 8);
  auto a = make_run(root, "ours", "vetl", urls_a, 10);
  auto s = summarize(std::vector<std::string>{b, a});
  ASSERT_EQ(s.groups.size(), 2u);
  EXPECT_EQ(s.groups[0].label, "random");
  EXPECT_DOUBLE_EQ(s.groups[1].gain_states, (5.0 - 4.0) / 4.0);
  EXPECT_DOUBLE_EQ(s.groups[1].gain_actions, (10.0 - 8.0) / 8.0);
  EXPECT_DOUBLE_EQ(s.groups[1].coverage_states, 1.0);
  EXPECT_DOUBLE_EQ(s.groups[0].coverage_states, 0.8);
  auto csv = to_csv(s);
  EXPECT_NE(csv.find("mean,vetl,1,5,10,0,4,1.5,0.25,0.25,1,0.5556"), std::string::npos) << csv;
  auto other = summarize(std::vector<std::string>{b, a}, "vetl");
  EXPECT_DOUBLE_EQ(other.groups[0].gain_states, (4.0 - 5.0) / 5.0);
  EXPECT_THROW(summarize(std::vector<std::string>{a}, "nope"), ReportError);
}

TEST(Report, VerifyAcceptsConsistentRun) {
  auto root = scratch("report_verify");
  auto d = make_run(root, "ok", "vetl", {"http://h/a", "http://h/b#x", "http://h/b"}, 3);
  auto v = verify_run(d);
  EXPECT_TRUE(v.ok) << (v.problems.empty() ? "" : v.problems[0]);
}

TEST(Report, VerifyFlagsTamperedMetrics) {
  auto root = scratch("report_tamper");
  auto d = make_run(root, "bad", "vetl", {"http://h/a", "http://h/b", "http://h/c"}, 3);
  auto m = json::parse(read_file(d + "/metrics.json"));
  m["visited_states"].push_back("http://h/zzz");
  m["curve"][1][1] = 1;
  write_file(d + "/metrics.json", m.dump());
  auto v = verify_run(d);
  EXPECT_FALSE(v.ok);
  EXPECT_GE(v.problems.size(), 2u);
}

TEST(Report, VerifyFlagsInterestedOutsideCandidates) {
  auto root = scratch("report_subset");
  auto d = make_run(root, "sub", "vetl", {"http://h/a", "http://h/b"}, 1);
  auto lines = split(trim(read_file(d + "/trace.jsonl")), '\n');
  auto j = json::parse(lines[0]);
  j["interested"] = {"ghost"};
  write_file(d + "/trace.jsonl", j.dump() + "\n");
  EXPECT_FALSE(verify_run(d).ok);
}

TEST(Report, MissingFilesAreStructuralErrors) {
  auto root = scratch("report_missing");
  fs::create_directories(root / "empty");
  EXPECT_THROW(load_run((root / "empty").string()), ReportError);
  write_file((root / "empty" / "trace.jsonl").string(), "{not json\n");
  write_file((root / "empty" / "metrics.json").string(), "{}");
  EXPECT_THROW(load_run((root / "empty").string()), ReportError);
}

TEST(Report, CurveCsv) {
  auto root = scratch("report_curve");
  auto d = make_run(root, "c", "vetl", {"http://h/a", "http://h/b", "http://h/c"}, 4);
  EXPECT_EQ(curve_csv(load_run(d)), "actions,states,actions_discovered\n1,2,4\n2,3,4\n");
}

TEST(Report, SummarizeDoesNotTouchRunDirs) {
  auto root = scratch("report_pure");
  auto d = make_run(root, "p", "vetl", {"http://h/a", "http://h/b"}, 2);
  auto before = read_file(d + "/metrics.json") + read_file(d + "/trace.jsonl");
  summarize(std::vector<std::string>{d});
  verify_run(d);
  EXPECT_EQ(read_file(d + "/metrics.json") + read_file(d + "/trace.jsonl"), before);
}
