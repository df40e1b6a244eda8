#pragma once

// Built-in headless browser that speaks the subset of the W3C WebDriver
// protocol the driver module uses. It does not execute JavaScript; it
// implements static-page navigation, native form constraint validation,
// meta refresh and resource-failure console errors, which is what the
// bundled fixtures exercise.

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "vetl/html.hpp"
#include "vetl/raster.hpp"

namespace vetl::headless {

struct FetchResult {
  int status = 0;  // 0 on transport failure
  std::string body;
  std::string error;
};

using Fetcher = std::function<FetchResult(const std::string& url)>;

/// Plain HTTP GET over cpp-httplib (http:// only).
Fetcher http_fetcher();

/// A WebDriver command failure; `error` is the W3C error code.
class CommandError : public std::runtime_error {
 public:
  CommandError(std::string error, const std::string& message)
      : std::runtime_error(message), error_(std::move(error)) {}
  const std::string& error() const { return error_; }
  int http_status() const;

 private:
  std::string error_;
};

// Layout ---------------------------------------------------------------------

enum class PaintKind { text, link_text, heading_text, text_input, textarea, button, checkbox, image, rule };

struct Paint {
  PaintKind kind;
  Rect rect;
  const html::Node* node = nullptr;  // control or text owner
};

struct Box {
  Rect rect;
  bool displayed = false;
};

struct Layout {
  std::unordered_map<const html::Node*, Box> boxes;
  std::vector<Paint> paints;
  double content_height = 0;

  Box box(const html::Node* n) const {
    auto it = boxes.find(n);
    return it == boxes.end() ? Box{} : it->second;
  }
};

/// Live form-control state, keyed by element.
struct ControlState {
  std::unordered_map<const html::Node*, std::string> values;
  std::unordered_map<const html::Node*, bool> checked;

  std::string value_of(const html::Node& n) const;
  bool is_checked(const html::Node& n) const;
};

Layout layout_document(const html::Document& doc, int viewport_width);
Image render_viewport(const Layout& layout, const ControlState& state, int viewport_width, int viewport_height,
                      double scroll_y, double device_pixel_ratio);

/// True for input types that accept free text.
bool is_text_input_type(std::string_view type);

// Browser --------------------------------------------------------------------

struct ConsoleEntry {
  std::int64_t timestamp_ms = 0;
  std::string level;
  std::string source;
  std::string message;
  std::string url;
};

class Browser {
 public:
  explicit Browser(Fetcher fetcher = http_fetcher());

  void set_viewport(int width, int height);
  void set_device_pixel_ratio(double dpr) { dpr_ = dpr; }

  void navigate(const std::string& url);
  std::string current_url();
  std::string title();
  nlohmann::json execute(const std::string& script, const nlohmann::json& args);
  std::vector<std::uint8_t> screenshot_png();

  std::string find_element(const std::string& css_selector);
  void click(const std::string& element_id);
  void clear(const std::string& element_id);
  void send_keys(const std::string& element_id, const std::string& text);
  nlohmann::json property(const std::string& element_id, const std::string& name);

  nlohmann::json take_log();

  /// Test hook: navigate to `url` right before the `n`-th subsequent command.
  void navigate_after_commands(int n, std::string url);

  const html::Document& document() const { return doc_; }
  int viewport_width() const { return viewport_w_; }
  int viewport_height() const { return viewport_h_; }
  double scroll_y() const { return scroll_y_; }

 private:
  void tick();
  void load(const std::string& url, int redirects);
  void log_severe(const std::string& source, const std::string& message, const std::string& url);
  const Layout& current_layout();
  html::Node* resolve_element(const std::string& element_id);
  void submit_form(const html::Node& form, const html::Node* submitter);
  bool control_valid(const html::Node& control) const;
  const html::Node* form_owner(const html::Node& control) const;
  std::vector<const html::Node*> form_controls(const html::Node& form) const;
  void invalidate_layout() { layout_.reset(); }

  Fetcher fetcher_;
  html::Document doc_;
  std::string url_ = "about:blank";
  std::string token_;
  std::uint64_t documents_loaded_ = 0;
  ControlState controls_;
  std::optional<Layout> layout_;
  int viewport_w_ = 1280;
  int viewport_h_ = 800;
  double dpr_ = 1.0;
  double scroll_y_ = 0;
  std::vector<ConsoleEntry> console_;
  std::unordered_map<std::string, std::pair<std::uint64_t, html::Node*>> element_ids_;
  std::uint64_t next_element_id_ = 0;
  std::optional<std::pair<std::chrono::steady_clock::time_point, std::string>> refresh_;
  std::optional<std::pair<int, std::string>> armed_navigation_;
};

// WebDriver server -----------------------------------------------------------

struct ServerOptions {
  int viewport_width = 1280;
  int viewport_height = 800;
  double device_pixel_ratio = 1.0;
  std::function<Fetcher()> fetcher_factory = [] { return http_fetcher(); };
};

class WebDriverServer {
 public:
  explicit WebDriverServer(ServerOptions options = {});
  ~WebDriverServer();
  WebDriverServer(const WebDriverServer&) = delete;
  WebDriverServer& operator=(const WebDriverServer&) = delete;

  /// Binds to 127.0.0.1 (port 0 = any free port) and serves on a background thread.
  int start(int port = 0);
  void stop();
  std::string endpoint() const;

  /// Runs `fn` on the browser behind a session while holding the server lock.
  void with_browser(const std::string& session_id, const std::function<void(Browser&)>& fn);
  std::vector<std::string> session_ids();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Static file server for fixtures --------------------------------------------

class StaticServer {
 public:
  explicit StaticServer(std::string root_dir);
  ~StaticServer();
  StaticServer(const StaticServer&) = delete;
  StaticServer& operator=(const StaticServer&) = delete;

  int start(int port = 0);
  void stop();
  std::string base_url() const;
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string root_;
  int port_ = 0;
};

}  // namespace vetl::headless
