#include "vetl/run_config.hpp"

#include <cstdlib>

#include "vetl/url.hpp"
#include "vetl/util.hpp"

#ifndef VETL_FIXTURE_DIR
#define VETL_FIXTURE_DIR "fixtures"
#endif

namespace vetl {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::vetl: return "vetl";
    case Variant::v1: return "v1";
    case Variant::lv: return "lv";
    case Variant::l: return "l";
    case Variant::random: return "random";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view text) {
  std::string t = to_lower(trim(text));
  for (Variant v : {Variant::vetl, Variant::v1, Variant::lv, Variant::l, Variant::random}) {
    if (t == to_string(v)) return v;
  }
  return std::nullopt;
}

bool uses_element_query(Variant v) { return v == Variant::vetl || v == Variant::lv; }
bool uses_text_backend(Variant v) { return v == Variant::lv || v == Variant::l; }

nlohmann::json to_json(const RunConfig& c) {
  return {{"start_url", c.start_url},
          {"fixture", c.fixture},
          {"budget", c.action_budget},
          {"variant", to_string(c.variant)},
          {"epsilon", c.epsilon},
          {"seed", c.rng_seed},
          {"model_endpoint", c.model_endpoint},
          {"model_name", c.model_name},
          {"api_key_env", c.api_key_env},
          {"model_supports_vision", c.model_supports_vision},
          {"text_model_endpoint", c.text_model_endpoint},
          {"text_model_name", c.text_model_name},
          {"model_timeout_s", c.model_timeout_s},
          {"model_max_retries", c.model_max_retries},
          {"temperature", c.temperature},
          {"webdriver", c.webdriver},
          {"out", c.output_dir},
          {"record", c.record_store},
          {"replay", c.replay_store},
          {"allowed_origins", c.allowed_origins},
          {"viewport", {c.viewport.width, c.viewport.height}},
          {"save_screenshots", c.save_screenshots}};
}

namespace {

constexpr std::string_view kScriptPrefix = "script:";

bool is_script(const std::string& endpoint) { return endpoint.starts_with(kScriptPrefix); }

// Scripted backends carry their own capability flag.
bool endpoint_has_vision(const std::string& endpoint, bool flag) {
  if (!is_script(endpoint)) return flag;
  return model::ScriptedBackend::load(endpoint.substr(kScriptPrefix.size()))->supports_vision();
}

std::shared_ptr<model::Backend> open_endpoint(const RunConfig& c, const std::string& endpoint,
                                              const std::string& name, bool vision) {
  if (is_script(endpoint)) return model::ScriptedBackend::load(endpoint.substr(kScriptPrefix.size()));
  model::BackendConfig bc;
  bc.endpoint = endpoint;
  bc.model_name = name;
  bc.supports_vision = vision;
  bc.timeout_s = c.model_timeout_s;
  bc.max_retries = c.model_max_retries;
  bc.temperature = c.temperature;
  if (!c.api_key_env.empty()) {
    if (const char* key = std::getenv(c.api_key_env.c_str())) bc.api_key = key;
  }
  return std::make_shared<model::HttpChatBackend>(bc);
}

}  // namespace

void validate(const RunConfig& c) {
  if (c.start_url.empty() && c.fixture.empty()) throw ConfigError("either --url or --fixture is required");
  if (!c.start_url.empty() && !url::parse(c.start_url)) throw ConfigError("invalid start URL " + c.start_url);
  if (c.action_budget <= 0) throw ConfigError("budget must be positive");
  if (!(c.epsilon >= 0 && c.epsilon <= 1)) throw ConfigError("epsilon must lie in [0,1]");
  if (!c.record_store.empty() && !c.replay_store.empty()) throw ConfigError("--record and --replay are exclusive");
  if (c.variant == Variant::random) return;
  bool replay = !c.replay_store.empty();
  bool needs_vision = c.variant != Variant::l;
  if (c.model_endpoint.empty() && !replay && (needs_vision || c.text_model_endpoint.empty())) {
    throw ConfigError("variant " + std::string(to_string(c.variant)) + " needs --model-endpoint");
  }
  if (needs_vision && !c.model_endpoint.empty()) {
    bool vision;
    try {
      vision = endpoint_has_vision(c.model_endpoint, c.model_supports_vision);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("cannot load model script: ") + e.what());
    }
    if (!vision) throw ConfigError("variant requires vision backend");
  }
  if (needs_vision && c.model_endpoint.empty() && replay && !c.model_supports_vision) {
    throw ConfigError("variant requires vision backend");
  }
}

Backends make_backends(const RunConfig& c) {
  Backends b;
  if (c.variant == Variant::random) return b;
  if (!c.replay_store.empty()) {
    auto replay = std::make_shared<model::ReplayBackend>(c.replay_store, c.model_supports_vision);
    if (c.variant != Variant::l) b.vision = replay;
    if (uses_text_backend(c.variant)) b.text = std::make_shared<model::ReplayBackend>(c.replay_store, false);
    return b;
  }
  if (c.variant != Variant::l) {
    b.vision = open_endpoint(c, c.model_endpoint, c.model_name, c.model_supports_vision);
  }
  if (uses_text_backend(c.variant)) {
    if (!c.text_model_endpoint.empty()) {
      b.text = open_endpoint(c, c.text_model_endpoint, c.text_model_name, false);
    } else if (b.vision) {
      b.text = b.vision;
    } else {
      b.text = open_endpoint(c, c.model_endpoint, c.model_name, c.model_supports_vision);
    }
  }
  if (!c.record_store.empty()) {
    if (b.vision) b.vision = std::make_shared<model::RecordingBackend>(b.vision, c.record_store);
    if (b.text) b.text = std::make_shared<model::RecordingBackend>(b.text, c.record_store);
  }
  return b;
}

std::string fixture_root() {
  if (const char* env = std::getenv("VETL_FIXTURE_DIR"); env && *env) return env;
  return VETL_FIXTURE_DIR;
}

}  // namespace vetl
