#include "vetl/explorer.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include "vetl/headless.hpp"
#include "vetl/url.hpp"
#include "vetl/util.hpp"

namespace vetl::explore {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {
// iterations in a row without a dispatched action before the run gives up
constexpr int kMaxIdle = 50;
}  // namespace

std::string_view to_string(ActionKind kind) { return kind == ActionKind::type_text ? "type_text" : "click"; }

std::string normalize_url(std::string_view raw) { return url::normalize(raw); }

json to_json(const StepRecord& r) {
  auto keys = [](const std::vector<dom::ElementKey>& ks) {
    json a = json::array();
    for (const auto& k : ks) a.push_back(k.value);
    return a;
  };
  json j{{"step", r.step_index},
         {"action", to_string(r.action)},
         {"element", r.element.value},
         {"label", r.label},
         {"url_before", r.url_before},
         {"url_after", r.url_after}};
  if (r.action == ActionKind::type_text) j["text"] = r.text;
  j["reward"] = r.reward ? json(*r.reward) : json(nullptr);
  j["branch"] = r.branch ? json(bandit::to_string(*r.branch)) : json(nullptr);
  j["exchanges"] = r.exchanges;
  if (r.action == ActionKind::click) {
    j["interested"] = keys(r.interested);
    j["candidates"] = keys(r.candidates);
  }
  return j;
}

StepRecord step_from_json(const json& j) {
  StepRecord r;
  r.step_index = j.at("step").get<int>();
  std::string action = j.at("action").get<std::string>();
  if (action == "type_text") {
    r.action = ActionKind::type_text;
  } else if (action == "click") {
    r.action = ActionKind::click;
  } else {
    throw std::invalid_argument("unknown action " + action);
  }
  r.element.value = j.at("element").get<std::string>();
  r.label = j.value("label", "");
  r.text = j.value("text", "");
  r.url_before = j.at("url_before").get<std::string>();
  r.url_after = j.at("url_after").get<std::string>();
  if (j.contains("reward") && !j["reward"].is_null()) r.reward = j["reward"].get<int>();
  if (j.contains("branch") && !j["branch"].is_null()) {
    r.branch = j["branch"] == "exploit" ? bandit::Branch::exploit : bandit::Branch::explore;
  }
  if (j.contains("exchanges")) r.exchanges = j["exchanges"].get<std::vector<int>>();
  for (const auto& k : j.value("interested", json::array())) r.interested.push_back({k.get<std::string>()});
  for (const auto& k : j.value("candidates", json::array())) r.candidates.push_back({k.get<std::string>()});
  return r;
}

json to_json(const SessionMetrics& m, const RunConfig& config) {
  json failures = json::array();
  for (const auto& f : m.failures) {
    failures.push_back({{"step", f.step_index}, {"kind", f.kind}, {"message", f.message}, {"url", f.url}});
  }
  json curve = json::array();
  for (const auto& p : m.curve) curve.push_back({p.actions, p.states, p.discovered});
  json keys = json::array();
  for (const auto& k : m.discovered_actions) keys.push_back(k.value);
  return {{"variant", to_string(config.variant)},
          {"seed", config.rng_seed},
          {"budget", config.action_budget},
          {"actions", m.actions},
          {"visited_states", m.visited_states},
          {"visited_state_count", m.visited_states.size()},
          {"discovered_actions", keys},
          {"discovered_action_count", m.discovered_actions.size()},
          {"failures", failures},
          {"failure_count", m.failures.size()},
          {"model_queries", m.model_queries},
          {"wall_time_s", m.wall_time_s},
          {"aborted", m.aborted},
          {"abort_reason", m.abort_reason},
          {"curve", curve}};
}

struct Explorer::Observation {
  std::unique_ptr<dom::ParsedPage> page;
  std::vector<dom::InputWidget> widgets;
  std::vector<dom::InteractiveElement> candidates;
  std::set<dom::ElementKey> keys;

  const driver::PageSnapshot& snap() const { return page->snapshot(); }
  const std::string& url() const { return snap().url; }
  const std::string& token() const { return snap().page_token; }

  const dom::InputWidget* widget(const dom::ElementKey& key) const {
    for (const auto& w : widgets) {
      if (w.key == key) return &w;
    }
    return nullptr;
  }
  const dom::InteractiveElement* candidate(const dom::ElementKey& key) const {
    for (const auto& c : candidates) {
      if (c.key == key) return &c;
    }
    return nullptr;
  }
  // viewport-relative CSS rect
  Rect in_viewport(const Rect& page_rect) const {
    return {page_rect.x - snap().scroll_x, page_rect.y - snap().scroll_y, page_rect.width, page_rect.height};
  }
  bool visible(const Rect& page_rect) const {
    Rect r = in_viewport(page_rect);
    return r.width > 0 && r.height > 0 && r.x >= 0 && r.y >= 0 && r.right() <= snap().viewport.width &&
           r.bottom() <= snap().viewport.height;
  }
};

Explorer::Explorer(RunConfig config, driver::BrowserSession& session, Backends backends)
    : config_(std::move(config)),
      session_(session),
      backends_(std::move(backends)),
      tables_(config_.variant == Variant::random ? 1.0 : config_.epsilon, config_.rng_seed) {
  if (!config_.output_dir.empty()) {
    fs::create_directories(config_.output_dir);
    if (config_.save_screenshots) fs::create_directories(fs::path(config_.output_dir) / "screenshots");
    write_file((fs::path(config_.output_dir) / "config.json").string(), to_json(config_).dump(2) + "\n");
    trace_path_ = (fs::path(config_.output_dir) / "trace.jsonl").string();
    std::ofstream(trace_path_, std::ios::trunc);
    log_.open((fs::path(config_.output_dir) / "exchanges.jsonl").string());
  }
  if (backends_.vision) vision_client_.emplace(backends_.vision, &log_);
  if (backends_.text) text_client_.emplace(backends_.text, &log_);
  if (config_.variant != Variant::random) {
    if (!text_client_ && uses_text_backend(config_.variant)) throw ConfigError("variant needs a text backend");
    if (!vision_client_ && !uses_text_backend(config_.variant)) throw ConfigError("variant requires vision backend");
    if (!vision_client_ && uses_element_query(config_.variant)) throw ConfigError("variant requires vision backend");
  }
  origins_.insert(config_.allowed_origins.begin(), config_.allowed_origins.end());
  if (origins_.empty()) {
    if (auto u = url::parse(config_.start_url)) origins_.insert(u->origin());
  }
}

Explorer::Observation Explorer::observe(driver::PageSnapshot snapshot) {
  Observation obs;
  obs.page = std::make_unique<dom::ParsedPage>(std::move(snapshot));
  obs.widgets = dom::detect_input_widgets(*obs.page);
  obs.candidates = dom::candidate_elements(*obs.page);
  for (const auto& w : obs.widgets) obs.keys.insert(w.key);
  for (const auto& c : obs.candidates) obs.keys.insert(c.key);
  return obs;
}

void Explorer::begin_visit_if_new(const Observation& obs) {
  if (obs.token() == visit_token_) return;
  visit_token_ = obs.token();
  interested_.clear();
  attempted_.clear();
}

bool Explorer::needs_recovery(const Observation& obs) const {
  auto u = url::parse(obs.url());
  if (!u || !origins_.contains(u->origin())) return true;
  return obs.candidates.empty();
}

void Explorer::recover(const std::string& why) {
  metrics_.failures.push_back({metrics_.actions, "recovery", why, ""});
  session_.navigate(config_.start_url);
}

void Explorer::drain_console() {
  for (const auto& f : session_.console_failures()) {
    metrics_.failures.push_back({metrics_.actions, "console", f.message, f.source_url});
  }
}

void Explorer::save_screenshot(const Image& image, const char* kind) {
  if (config_.output_dir.empty() || !config_.save_screenshots) return;
  char name[32];
  std::snprintf(name, sizeof name, "%04d_%s.png", metrics_.actions, kind);
  save_png(image, (fs::path(config_.output_dir) / "screenshots" / name).string());
}

void Explorer::record(StepRecord r) {
  r.step_index = static_cast<int>(trace_.size());
  metrics_.visited_states.insert(normalize_url(r.url_before));
  metrics_.visited_states.insert(normalize_url(r.url_after));
  metrics_.curve.push_back({metrics_.actions, static_cast<int>(metrics_.visited_states.size()),
                            static_cast<int>(metrics_.discovered_actions.size())});
  if (!trace_path_.empty()) {
    std::ofstream out(trace_path_, std::ios::app | std::ios::binary);
    out << to_json(r).dump() << '\n';
  }
  trace_.push_back(std::move(r));
}

std::optional<Explorer::Observation> Explorer::ensure_in_view(Observation& obs, const dom::ElementKey& key) {
  const dom::InputWidget* w = obs.widget(key);
  if (!w) return std::nullopt;
  if (obs.visible(w->handle.rect)) return std::nullopt;
  if (!session_.scroll_into_view(w->handle)) return std::nullopt;
  return observe(session_.snapshot());
}

std::string Explorer::generate_text(Observation& obs, const dom::InputWidget& widget, std::vector<int>& exchanges) {
  std::string gc = dom::global_context(*obs.page);
  prompt::PromptBundle bundle;
  model::ModelClient* client;
  if (uses_text_backend(config_.variant)) {
    bundle = prompt::build_input_prompt(gc, widget.local_context, widget, prompt::InputFlavor::text_only);
    client = &*text_client_;
  } else {
    bundle = prompt::build_input_prompt(gc, widget.local_context, widget, prompt::InputFlavor::vision);
    auto annotated = annotate::annotate_input(obs.snap().screenshot, obs.in_viewport(widget.handle.rect),
                                              obs.snap().device_pixel_ratio);
    save_screenshot(annotated.image, "input");
    bundle.image = std::move(annotated.image);
    client = &*vision_client_;
  }
  int seq = -1;
  std::string raw = client->query(bundle, metrics_.actions, &seq);
  ++metrics_.model_queries;
  if (seq >= 0) exchanges.push_back(seq);
  return *prompt::parse_text_answer(raw).text_value;
}

void Explorer::query_interested(Observation& obs, const dom::InputWidget& widget, const std::string& text,
                                std::vector<int>& exchanges) {
  auto add = [&](const dom::ElementKey& key) {
    if (std::find(interested_.begin(), interested_.end(), key) == interested_.end()) interested_.push_back(key);
  };
  if (!uses_element_query(config_.variant)) {
    if (obs.candidates.empty() || !widget.node) return;
    add(dom::nearest_button(obs.candidates, *widget.node).key);
    return;
  }
  if (!obs.visible(widget.handle.rect)) return;
  std::vector<std::pair<dom::ElementKey, Rect>> buttons;
  for (const auto& c : obs.candidates) {
    if (obs.visible(c.handle.rect)) buttons.emplace_back(c.key, obs.in_viewport(c.handle.rect));
  }
  if (buttons.empty()) return;
  auto annotated = annotate::annotate_elements(obs.snap().screenshot, obs.in_viewport(widget.handle.rect), buttons,
                                               obs.snap().device_pixel_ratio);
  save_screenshot(annotated.image, "element");
  auto bundle = prompt::build_element_prompt(dom::global_context(*obs.page), widget.local_context, text,
                                             static_cast<int>(buttons.size()));
  bundle.image = std::move(annotated.image);
  bundle.button_numbering = annotated.numbering;
  int seq = -1;
  std::string raw = vision_client_->query(bundle, metrics_.actions, &seq);
  ++metrics_.model_queries;
  if (seq >= 0) exchanges.push_back(seq);
  std::set<int> valid;
  for (const auto& [n, key] : bundle.button_numbering) valid.insert(n);
  auto answer = prompt::parse_button_answer(raw, valid);
  if (answer.kind == prompt::AnswerKind::button_number) add(bundle.button_numbering.at(*answer.number_value));
}

std::optional<Explorer::Observation> Explorer::fill_widget(Observation& obs, const dom::InputWidget& target) {
  dom::ElementKey key = target.key;
  if (auto scrolled = ensure_in_view(obs, key)) obs = std::move(*scrolled);
  const dom::InputWidget* widget = obs.widget(key);
  if (!widget || (!uses_text_backend(config_.variant) && !obs.visible(widget->handle.rect))) {
    metrics_.failures.push_back({metrics_.actions, "widget_out_of_view", key.value, obs.url()});
    return std::nullopt;
  }
  std::vector<int> exchanges;
  std::string text = generate_text(obs, *widget, exchanges);
  try {
    session_.type_text(widget->handle, text);
  } catch (const driver::DriverError& e) {
    if (e.code() == driver::Errc::session_lost) throw;
    metrics_.failures.push_back({metrics_.actions, std::string(driver::to_string(e.code())), e.what(), obs.url()});
    return std::nullopt;
  }
  ++metrics_.actions;
  Observation after = observe(session_.snapshot());
  metrics_.discovered_actions.insert(after.keys.begin(), after.keys.end());
  // typing that loads a new document ends the visit; no interested element then
  if (after.token() == obs.token() && budget_left()) {
    if (const dom::InputWidget* now = after.widget(key)) query_interested(after, *now, text, exchanges);
  }
  StepRecord r;
  r.action = ActionKind::type_text;
  r.element = key;
  r.label = widget->local_context;
  r.text = text;
  r.url_before = obs.url();
  r.url_after = after.url();
  r.exchanges = std::move(exchanges);
  record(std::move(r));
  return after;
}

std::optional<Explorer::Observation> Explorer::click_target(Observation& obs) {
  bandit::SelectionContext ctx;
  for (const auto& c : obs.candidates) ctx.candidates.push_back(c.key);
  for (const auto& k : interested_) {
    if (obs.candidate(k)) ctx.interested.push_back(k);
  }
  auto selection = bandit::select_target(tables_, ctx);
  const dom::InteractiveElement* target = obs.candidate(selection.target);
  try {
    session_.click(target->handle);
  } catch (const driver::DriverError& e) {
    if (e.code() == driver::Errc::session_lost) throw;
    metrics_.failures.push_back({metrics_.actions, std::string(driver::to_string(e.code())), e.what(), obs.url()});
    return std::nullopt;
  }
  ++metrics_.actions;
  Observation after = observe(session_.snapshot());
  int reward = bandit::curiosity_reward(metrics_.discovered_actions, after.keys);
  metrics_.discovered_actions.insert(after.keys.begin(), after.keys.end());
  bandit::update(tables_, selection.target, reward);
  StepRecord r;
  r.action = ActionKind::click;
  r.element = selection.target;
  r.label = target->label;
  r.url_before = obs.url();
  r.url_after = after.url();
  r.reward = reward;
  r.branch = selection.branch;
  r.interested = std::move(ctx.interested);
  r.candidates = std::move(ctx.candidates);
  record(std::move(r));
  return after;
}

SessionMetrics Explorer::run() {
  auto started = std::chrono::steady_clock::now();
  std::optional<Observation> obs;
  int idle = 0;
  try {
    while (budget_left()) {
      if (idle > kMaxIdle) {
        metrics_.aborted = true;
        metrics_.abort_reason = "no action could be dispatched in " + std::to_string(kMaxIdle) + " iterations";
        break;
      }
      if (!obs) obs = observe(session_.snapshot());
      metrics_.discovered_actions.insert(obs->keys.begin(), obs->keys.end());
      begin_visit_if_new(*obs);
      drain_console();
      if (needs_recovery(*obs)) {
        ++idle;
        recover(obs->candidates.empty() ? "no candidate elements at " + obs->url() : "left origin at " + obs->url());
        obs.reset();
        continue;
      }
      int before = metrics_.actions;
      const dom::InputWidget* empty = nullptr;
      if (config_.variant != Variant::random) {
        for (const auto& w : obs->widgets) {
          if (!w.filled && !attempted_.contains(w.key)) {
            empty = &w;
            break;
          }
        }
      }
      std::optional<Observation> next;
      if (empty) {
        attempted_.insert(empty->key);
        next = fill_widget(*obs, *empty);
      } else {
        next = click_target(*obs);
      }
      idle = metrics_.actions == before ? idle + 1 : 0;
      obs = std::move(next);
    }
    drain_console();
  } catch (const driver::DriverError& e) {
    metrics_.aborted = true;
    metrics_.abort_reason = e.what();
  } catch (const model::ModelError& e) {
    metrics_.aborted = true;
    metrics_.abort_reason = e.what();
  }
  metrics_.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (!config_.output_dir.empty()) {
    write_file((fs::path(config_.output_dir) / "metrics.json").string(), to_json(metrics_, config_).dump(2) + "\n");
  }
  return metrics_;
}

SessionMetrics execute_run(RunConfig config) {
  validate(config);
  std::optional<headless::StaticServer> fixtures;
  if (config.start_url.empty()) {
    fs::path dir = fs::path(fixture_root()) / config.fixture;
    if (!fs::exists(dir / "index.html")) throw ConfigError("unknown fixture " + config.fixture);
    fixtures.emplace(fixture_root());
    fixtures->start();
    config.start_url = fixtures->base_url() + "/" + config.fixture + "/index.html";
  }
  std::optional<headless::WebDriverServer> builtin;
  std::string endpoint = config.webdriver;
  if (endpoint.empty() || endpoint == "builtin") {
    headless::ServerOptions opts;
    opts.viewport_width = config.viewport.width;
    opts.viewport_height = config.viewport.height;
    builtin.emplace(opts);
    builtin->start();
    endpoint = builtin->endpoint();
  }
  Backends backends = make_backends(config);
  auto session = driver::BrowserSession::connect(endpoint, config.start_url, config.viewport);
  Explorer explorer(config, session, std::move(backends));
  SessionMetrics metrics = explorer.run();
  session.close();
  return metrics;
}

}  // namespace vetl::explore
