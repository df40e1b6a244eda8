#pragma once

#include <chrono>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <stdexcept>
#include <string>
#include <vector>

#include "vetl/prompt.hpp"

namespace vetl::model {

enum class Errc { backend_unavailable, vision_unsupported, timeout, replay_miss, bad_script };

std::string_view to_string(Errc code);

class ModelError : public std::runtime_error {
 public:
  ModelError(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

struct BackendConfig {
  std::string endpoint;  // full chat-completions URL
  std::string model_name = "llava-1.5-7b";
  std::optional<std::string> api_key;
  bool supports_vision = true;
  double timeout_s = 60;
  int max_retries = 3;
  double temperature = 0.2;
  std::chrono::milliseconds backoff{500};
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const prompt::PromptBundle& bundle) = 0;
  virtual bool supports_vision() const = 0;
  virtual std::string name() const = 0;
};

/// OpenAI-compatible chat completion over HTTP(S); images go inline as PNG data URIs.
class HttpChatBackend : public Backend {
 public:
  explicit HttpChatBackend(BackendConfig config);
  std::string complete(const prompt::PromptBundle& bundle) override;
  bool supports_vision() const override { return config_.supports_vision; }
  std::string name() const override { return config_.model_name; }

  /// Request body for `bundle`, exposed for tests.
  std::string request_body(const prompt::PromptBundle& bundle) const;

 private:
  BackendConfig config_;
};

/// Answers from an ordered script. The first unconsumed entry whose matcher
/// hits the prompt text answers; non-sticky entries are consumed.
class ScriptedBackend : public Backend {
 public:
  struct Entry {
    std::string contains;               // substring matcher, when non-empty
    std::optional<std::string> pattern;  // ECMAScript regex searched in the prompt
    std::string response;
    bool sticky = false;
  };

  ScriptedBackend(std::vector<Entry> entries, std::string default_response, bool vision = true,
                  std::string name = "scripted");
  /// {"supports_vision":bool,"default":str,"entries":[{"contains"|"pattern":str,"response":str,"sticky":bool}]}
  static std::unique_ptr<ScriptedBackend> from_json(std::string_view json_text);
  static std::unique_ptr<ScriptedBackend> load(const std::string& path);

  std::string complete(const prompt::PromptBundle& bundle) override;
  bool supports_vision() const override { return vision_; }
  std::string name() const override { return name_; }
  std::size_t remaining() const;

 private:
  struct Slot {
    Entry entry;
    std::optional<std::regex> re;
    bool used = false;
  };
  std::vector<Slot> slots_;
  std::string default_response_;
  bool vision_;
  std::string name_;
  mutable std::mutex mu_;
};

/// sha256 over the PNG encoding; empty when there is no image.
std::string image_digest(const prompt::PromptBundle& bundle);
std::string replay_key(const prompt::PromptBundle& bundle);

/// Proxies `inner` and appends every exchange to a JSONL store, with images
/// written next to it under "<store>.images/<digest>.png".
class RecordingBackend : public Backend {
 public:
  RecordingBackend(std::shared_ptr<Backend> inner, std::string store_path);
  std::string complete(const prompt::PromptBundle& bundle) override;
  bool supports_vision() const override { return inner_->supports_vision(); }
  std::string name() const override { return inner_->name(); }

 private:
  std::shared_ptr<Backend> inner_;
  std::string store_path_;
  std::mutex mu_;
};

/// Answers from a recorded store. Responses for the same key come back in
/// recorded order; once exhausted the last one repeats.
class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(const std::string& store_path, bool vision = true);
  std::string complete(const prompt::PromptBundle& bundle) override;
  bool supports_vision() const override { return vision_; }
  std::string name() const override { return name_; }

 private:
  struct Queue {
    std::vector<std::string> responses;
    std::size_t next = 0;
  };
  std::map<std::string, Queue> by_key_;
  bool vision_;
  std::string name_ = "replay";
  std::mutex mu_;
};

struct Exchange {
  int step_index = 0;
  int sequence = 0;
  std::string backend;
  prompt::Flavor flavor = prompt::Flavor::input_prompt;
  std::string prompt_text;
  std::string image_digest;
  std::string raw_response;
  double latency_s = 0;
};

/// Append-only exchange log; optionally mirrored to a JSONL file.
class ExchangeLog {
 public:
  ExchangeLog() = default;
  explicit ExchangeLog(std::string path) { open(std::move(path)); }
  /// Truncates `path` and mirrors subsequent appends there.
  void open(std::string path);
  int append(Exchange exchange);  // returns the exchange's sequence number
  std::vector<Exchange> exchanges() const;
  std::size_t size() const;

 private:
  std::string path_;
  std::vector<Exchange> entries_;
  mutable std::mutex mu_;
};

class ModelClient {
 public:
  ModelClient(std::shared_ptr<Backend> backend, ExchangeLog* log = nullptr);
  /// Sends one single-turn query. Throws VisionUnsupported when the bundle
  /// carries an image and the backend cannot take one.
  std::string query(const prompt::PromptBundle& bundle, int step_index, int* sequence = nullptr);
  const Backend& backend() const { return *backend_; }

 private:
  std::shared_ptr<Backend> backend_;
  ExchangeLog* log_;
};

}  // namespace vetl::model
