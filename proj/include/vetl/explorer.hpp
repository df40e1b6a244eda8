#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "vetl/annotator.hpp"
#include "vetl/bandit.hpp"
#include "vetl/dom_context.hpp"
#include "vetl/driver.hpp"
#include "vetl/model_client.hpp"
#include "vetl/prompt.hpp"
#include "vetl/run_config.hpp"

namespace vetl::explore {

enum class ActionKind { type_text, click };
std::string_view to_string(ActionKind kind);

struct StepRecord {
  int step_index = 0;
  ActionKind action = ActionKind::click;
  dom::ElementKey element;
  std::string label;  // visible text of the target, for readers of the trace
  std::string text;   // typed text
  std::string url_before;
  std::string url_after;
  std::optional<int> reward;
  std::optional<bandit::Branch> branch;
  std::vector<int> exchanges;               // sequence numbers in exchanges.jsonl
  std::vector<dom::ElementKey> interested;  // E_I at selection time
  std::vector<dom::ElementKey> candidates;  // E_C at selection time
};

nlohmann::json to_json(const StepRecord& r);
StepRecord step_from_json(const nlohmann::json& j);

struct FailureEntry {
  int step_index = 0;  // actions executed when observed
  std::string kind;    // "console", "stale_element", "not_interactable", "recovery", ...
  std::string message;
  std::string url;
};

struct CurvePoint {
  int actions = 0;
  int states = 0;
  int discovered = 0;
  bool operator==(const CurvePoint&) const = default;
};

struct SessionMetrics {
  std::set<std::string> visited_states;
  std::set<dom::ElementKey> discovered_actions;
  std::vector<FailureEntry> failures;
  std::vector<CurvePoint> curve;
  int actions = 0;
  int model_queries = 0;
  double wall_time_s = 0;
  bool aborted = false;
  std::string abort_reason;
};

nlohmann::json to_json(const SessionMetrics& m, const RunConfig& config);

/// normalize_url: case-folds scheme and host, drops the fragment and a
/// trailing slash on non-root paths.
std::string normalize_url(std::string_view raw);

/// The exploration loop bound to one browser session.
class Explorer {
 public:
  Explorer(RunConfig config, driver::BrowserSession& session, Backends backends);

  /// Runs until the budget is spent or the session is lost. When an output
  /// directory is configured the trace, exchanges, metrics and screenshots go there.
  SessionMetrics run();

  const std::vector<StepRecord>& trace() const { return trace_; }
  const model::ExchangeLog& exchanges() const { return log_; }

 private:
  struct Observation;

  Observation observe(driver::PageSnapshot snapshot);
  void begin_visit_if_new(const Observation& obs);
  bool needs_recovery(const Observation& obs) const;
  void recover(const std::string& why);
  std::optional<Observation> fill_widget(Observation& obs, const dom::InputWidget& widget);
  std::optional<Observation> click_target(Observation& obs);
  std::optional<Observation> ensure_in_view(Observation& obs, const dom::ElementKey& key);
  void record(StepRecord r);
  std::string generate_text(Observation& obs, const dom::InputWidget& widget, std::vector<int>& exchanges);
  void query_interested(Observation& obs, const dom::InputWidget& widget, const std::string& text,
                        std::vector<int>& exchanges);
  void drain_console();
  void save_screenshot(const Image& image, const char* kind);
  bool budget_left() const { return metrics_.actions < config_.action_budget; }

  RunConfig config_;
  driver::BrowserSession& session_;
  Backends backends_;
  model::ExchangeLog log_;
  std::optional<model::ModelClient> vision_client_;
  std::optional<model::ModelClient> text_client_;
  bandit::BanditTables tables_;
  SessionMetrics metrics_;
  std::vector<StepRecord> trace_;
  std::string trace_path_;
  std::set<std::string> origins_;

  std::string visit_token_;
  std::vector<dom::ElementKey> interested_;
  std::set<dom::ElementKey> attempted_;
};

/// Full run setup: fixture server and built-in WebDriver when requested,
/// backends, browser session, exploration, output files.
SessionMetrics execute_run(RunConfig config);

}  // namespace vetl::explore
