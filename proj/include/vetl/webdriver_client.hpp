#pragma once

#include <chrono>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace vetl::webdriver {

/// Key under which W3C element references are serialized.
inline constexpr const char* kElementKey = "element-6066-11e4-a52e-4f735466cecf";

/// Error reported by the remote end (`error` is the W3C error code string) or
/// by the transport (`error` == "transport").
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(std::string error, const std::string& message)
      : std::runtime_error(error + ": " + message), error_(std::move(error)) {}
  const std::string& error() const { return error_; }
  bool is_transport() const { return error_ == "transport"; }

 private:
  std::string error_;
};

/// Minimal synchronous client for the W3C WebDriver HTTP wire protocol.
class Client {
 public:
  explicit Client(const std::string& endpoint, std::chrono::seconds timeout = std::chrono::seconds(30));
  ~Client();
  Client(Client&&) noexcept;
  Client& operator=(Client&&) noexcept;

  nlohmann::json status();

  std::string new_session(const nlohmann::json& capabilities);
  void delete_session();
  const std::string& session_id() const { return session_id_; }

  void navigate(const std::string& url);
  std::string current_url();
  std::string title();
  nlohmann::json execute_sync(const std::string& script, const nlohmann::json& args = nlohmann::json::array());
  std::vector<std::uint8_t> screenshot_png();

  std::string find_element_css(const std::string& selector);
  void element_click(const std::string& element_id);
  void element_clear(const std::string& element_id);
  void element_send_keys(const std::string& element_id, const std::string& text);
  nlohmann::json element_property(const std::string& element_id, const std::string& name);

  void set_window_rect(int width, int height);
  std::string window_handle();
  std::vector<std::string> window_handles();
  void switch_to_window(const std::string& handle);
  void close_window();

  /// Legacy `se/log` endpoint (chromedriver and the built-in browser).
  nlohmann::json browser_log();

 private:
  nlohmann::json call(const std::string& method, const std::string& path, const nlohmann::json* body = nullptr);
  std::string session_path(const std::string& suffix) const;

  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string session_id_;
};

}  // namespace vetl::webdriver
