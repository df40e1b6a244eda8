#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vetl/driver.hpp"
#include "vetl/model_client.hpp"

namespace vetl {

enum class Variant { vetl, v1, lv, l, random };

std::string_view to_string(Variant v);
/// Accepts vetl|v1|lv|l|random, case-insensitive.
std::optional<Variant> parse_variant(std::string_view text);

/// Whether the variant asks the model to pick interested elements.
bool uses_element_query(Variant v);
/// Whether input text comes from the text-only prompt against the text backend.
bool uses_text_backend(Variant v);

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::string start_url;
  std::string fixture;  // bundled fixture name, alternative to start_url
  int action_budget = 200;
  Variant variant = Variant::vetl;
  double epsilon = 0.3;
  std::uint64_t rng_seed = 0;

  // "script:<path>" selects the scripted backend
  std::string model_endpoint;
  std::string model_name = "llava-1.5-7b";
  std::string api_key_env;
  bool model_supports_vision = true;
  std::string text_model_endpoint;
  std::string text_model_name = "vicuna-7b";
  double model_timeout_s = 60;
  int model_max_retries = 3;
  double temperature = 0.2;

  std::string webdriver = "builtin";
  std::string output_dir = "vetl-run";
  std::string record_store;
  std::string replay_store;
  std::vector<std::string> allowed_origins;  // empty: the start URL's origin
  driver::Viewport viewport;
  bool save_screenshots = true;
};

nlohmann::json to_json(const RunConfig& config);

/// Variant/backend compatibility; throws ConfigError with a user-facing message.
void validate(const RunConfig& config);

struct Backends {
  std::shared_ptr<model::Backend> vision;  // null when the variant needs none
  std::shared_ptr<model::Backend> text;
};

/// Builds the backends a variant needs, honoring record/replay stores.
Backends make_backends(const RunConfig& config);

/// Where bundled fixtures live: $VETL_FIXTURE_DIR or the source tree copy.
std::string fixture_root();

}  // namespace vetl
