#include "vetl/model_client.hpp"

#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <thread>

#include "vetl/url.hpp"
#include "vetl/util.hpp"

namespace vetl::model {

using json = nlohmann::json;

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::backend_unavailable: return "BackendUnavailable";
    case Errc::vision_unsupported: return "VisionUnsupported";
    case Errc::timeout: return "Timeout";
    case Errc::replay_miss: return "ReplayMiss";
    case Errc::bad_script: return "BadScript";
  }
  return "?";
}

HttpChatBackend::HttpChatBackend(BackendConfig config) : config_(std::move(config)) {
  if (!url::parse(config_.endpoint)) {
    throw ModelError(Errc::backend_unavailable, "invalid model endpoint " + config_.endpoint);
  }
}

std::string HttpChatBackend::request_body(const prompt::PromptBundle& bundle) const {
  json message{{"role", "user"}};
  if (bundle.image) {
    auto png = encode_png(*bundle.image);
    message["content"] = json::array(
        {{{"type", "text"}, {"text", bundle.text}},
         {{"type", "image_url"}, {"image_url", {{"url", "data:image/png;base64," + base64_encode(png)}}}}});
  } else {
    message["content"] = bundle.text;
  }
  json body{{"model", config_.model_name},
            {"temperature", config_.temperature},
            {"stream", false},
            {"messages", json::array({message})}};
  return body.dump();
}

std::string HttpChatBackend::complete(const prompt::PromptBundle& bundle) {
  auto u = *url::parse(config_.endpoint);
  std::string base = u.scheme + "://" + u.host + (u.port.empty() ? "" : ":" + u.port);
  std::string path = u.path.empty() ? "/" : u.path;
  if (u.has_query) path += "?" + u.query;
  std::string body = request_body(bundle);

  httplib::Client client(base);
  auto secs = static_cast<time_t>(config_.timeout_s);
  auto usecs = static_cast<time_t>((config_.timeout_s - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (config_.api_key) headers.emplace("Authorization", "Bearer " + *config_.api_key);

  Errc last = Errc::backend_unavailable;
  std::string detail;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config_.backoff * (1 << (attempt - 1)));
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      auto err = res.error();
      last = (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) ? Errc::timeout
                                                                                      : Errc::backend_unavailable;
      detail = httplib::to_string(err);
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last = Errc::backend_unavailable;
      detail = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw ModelError(Errc::backend_unavailable, "HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    try {
      auto reply = json::parse(res->body);
      const auto& content = reply.at("choices").at(0).at("message").at("content");
      if (content.is_string()) return content.get<std::string>();
      std::string joined;
      for (const auto& part : content) {
        if (part.value("type", "") == "text") joined += part.value("text", "");
      }
      return joined;
    } catch (const json::exception& e) {
      throw ModelError(Errc::backend_unavailable, std::string("malformed completion: ") + e.what());
    }
  }
  throw ModelError(last, "gave up after " + std::to_string(config_.max_retries + 1) + " attempts: " + detail);
}

ScriptedBackend::ScriptedBackend(std::vector<Entry> entries, std::string default_response, bool vision,
                                 std::string name)
    : default_response_(std::move(default_response)), vision_(vision), name_(std::move(name)) {
  for (auto& e : entries) {
    Slot s{std::move(e), std::nullopt, false};
    if (s.entry.pattern) {
      try {
        s.re.emplace(*s.entry.pattern);
      } catch (const std::regex_error& err) {
        throw ModelError(Errc::bad_script, "bad pattern " + *s.entry.pattern + ": " + err.what());
      }
    }
    slots_.push_back(std::move(s));
  }
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_json(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ModelError(Errc::bad_script, e.what());
  }
  std::vector<Entry> entries;
  for (const auto& item : doc.value("entries", json::array())) {
    Entry e;
    e.contains = item.value("contains", "");
    if (item.contains("pattern")) e.pattern = item.at("pattern").get<std::string>();
    if (!item.contains("response")) throw ModelError(Errc::bad_script, "script entry without response");
    e.response = item.at("response").get<std::string>();
    e.sticky = item.value("sticky", false);
    entries.push_back(std::move(e));
  }
  if (entries.empty() && !doc.contains("default")) throw ModelError(Errc::bad_script, "script is empty");
  return std::make_unique<ScriptedBackend>(std::move(entries), doc.value("default", ""),
                                           doc.value("supports_vision", true), doc.value("name", "scripted"));
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::load(const std::string& path) { return from_json(read_file(path)); }

std::string ScriptedBackend::complete(const prompt::PromptBundle& bundle) {
  std::lock_guard lock(mu_);
  for (auto& s : slots_) {
    if (s.used) continue;
    bool hit = true;
    if (!s.entry.contains.empty()) hit = bundle.text.find(s.entry.contains) != std::string::npos;
    if (hit && s.re) hit = std::regex_search(bundle.text, *s.re);
    if (!hit) continue;
    if (!s.entry.sticky) s.used = true;
    return s.entry.response;
  }
  return default_response_;
}

std::size_t ScriptedBackend::remaining() const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(std::count_if(slots_.begin(), slots_.end(), [](const Slot& s) { return !s.used; }));
}

std::string image_digest(const prompt::PromptBundle& bundle) {
  if (!bundle.image) return {};
  return sha256_hex(std::span<const std::uint8_t>(encode_png(*bundle.image)));
}

std::string replay_key(const prompt::PromptBundle& bundle) {
  return sha256_hex(bundle.text + '\x1f' + image_digest(bundle));
}

RecordingBackend::RecordingBackend(std::shared_ptr<Backend> inner, std::string store_path)
    : inner_(std::move(inner)), store_path_(std::move(store_path)) {}

std::string RecordingBackend::complete(const prompt::PromptBundle& bundle) {
  std::string response = inner_->complete(bundle);
  std::lock_guard lock(mu_);
  std::string digest;
  if (bundle.image) {
    auto png = encode_png(*bundle.image);
    digest = sha256_hex(std::span<const std::uint8_t>(png));
    std::filesystem::path dir = store_path_ + ".images";
    std::filesystem::create_directories(dir);
    auto file = dir / (digest + ".png");
    if (!std::filesystem::exists(file)) {
      write_file(file.string(), std::string_view(reinterpret_cast<const char*>(png.data()), png.size()));
    }
  }
  json line{{"key", sha256_hex(bundle.text + '\x1f' + digest)},
            {"prompt", bundle.text},
            {"image", digest.empty() ? json(nullptr) : json(digest + ".png")},
            {"response", response}};
  std::ofstream out(store_path_, std::ios::app | std::ios::binary);
  out << line.dump() << '\n';
  if (!out) throw ModelError(Errc::backend_unavailable, "cannot append to replay store " + store_path_);
  return response;
}

ReplayBackend::ReplayBackend(const std::string& store_path, bool vision) : vision_(vision) {
  std::ifstream in(store_path, std::ios::binary);
  if (!in) throw ModelError(Errc::replay_miss, "cannot open replay store " + store_path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      by_key_[j.at("key").get<std::string>()].responses.push_back(j.at("response").get<std::string>());
    } catch (const json::exception& e) {
      throw ModelError(Errc::replay_miss, store_path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::string ReplayBackend::complete(const prompt::PromptBundle& bundle) {
  std::lock_guard lock(mu_);
  auto it = by_key_.find(replay_key(bundle));
  if (it == by_key_.end()) {
    throw ModelError(Errc::replay_miss, "no recorded exchange for prompt starting \"" +
                                            bundle.text.substr(0, std::min<std::size_t>(60, bundle.text.size())) +
                                            "\"");
  }
  auto& q = it->second;
  std::size_t i = std::min(q.next, q.responses.size() - 1);
  ++q.next;
  return q.responses[i];
}

void ExchangeLog::open(std::string path) {
  std::lock_guard lock(mu_);
  path_ = std::move(path);
  std::ofstream truncate(path_, std::ios::binary | std::ios::trunc);
}

int ExchangeLog::append(Exchange exchange) {
  std::lock_guard lock(mu_);
  exchange.sequence = static_cast<int>(entries_.size());
  if (!path_.empty()) {
    json line{{"sequence", exchange.sequence},
              {"step", exchange.step_index},
              {"backend", exchange.backend},
              {"flavor", prompt::to_string(exchange.flavor)},
              {"prompt", exchange.prompt_text},
              {"image", exchange.image_digest},
              {"response", exchange.raw_response},
              {"latency_s", exchange.latency_s}};
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    out << line.dump() << '\n';
  }
  entries_.push_back(std::move(exchange));
  return entries_.back().sequence;
}

std::vector<Exchange> ExchangeLog::exchanges() const {
  std::lock_guard lock(mu_);
  return entries_;
}

std::size_t ExchangeLog::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

ModelClient::ModelClient(std::shared_ptr<Backend> backend, ExchangeLog* log)
    : backend_(std::move(backend)), log_(log) {}

std::string ModelClient::query(const prompt::PromptBundle& bundle, int step_index, int* sequence) {
  if (bundle.image && !backend_->supports_vision()) {
    throw ModelError(Errc::vision_unsupported, backend_->name() + " cannot accept image input");
  }
  auto start = std::chrono::steady_clock::now();
  std::string response = backend_->complete(bundle);
  double latency = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (log_) {
    int seq = log_->append(Exchange{step_index, 0, backend_->name(), bundle.flavor, bundle.text,
                                    image_digest(bundle), response, latency});
    if (sequence) *sequence = seq;
  }
  return response;
}

}  // namespace vetl::model
