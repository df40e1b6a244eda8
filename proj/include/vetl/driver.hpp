#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vetl/raster.hpp"

namespace vetl::webdriver {
class Client;
}

namespace vetl::driver {

enum class Errc { connection_failed, navigation_failed, session_lost, stale_element, not_interactable };

std::string_view to_string(Errc code);

class DriverError : public std::runtime_error {
 public:
  DriverError(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

/// Attribute stamped on every element by snapshot() so DOM nodes and
/// geometry can be joined; never part of an element's identity.
inline constexpr const char* kNodeAttribute = "data-vetl-node";

struct Viewport {
  int width = 1280;
  int height = 800;
};

struct ElementGeometry {
  std::string node_id;  // value of kNodeAttribute
  Rect rect;            // CSS px, page-relative
  bool displayed = false;
  bool enabled = true;
  std::optional<std::string> value;  // live value of form controls
};

/// One observation of the browser. All fields stem from the same document.
struct PageSnapshot {
  std::string url;
  std::string title;
  std::string html;
  Image screenshot;  // viewport only, device pixels
  Viewport viewport;
  double device_pixel_ratio = 1.0;
  double scroll_x = 0;
  double scroll_y = 0;
  std::string page_token;  // changes whenever a new document loads
  std::vector<ElementGeometry> geometry;

  const ElementGeometry* find_geometry(std::string_view node_id) const;
};

struct ElementHandle {
  std::string remote_id;
  Rect rect;
  bool displayed = false;
  bool enabled = true;
};

struct FailureRecord {
  std::int64_t timestamp_ms = 0;
  std::string level;
  std::string message;
  std::string source_url;
};

struct SessionOptions {
  std::chrono::milliseconds navigation_timeout{5000};
  std::string browser_binary;
  std::vector<std::string> browser_args;
  int max_snapshot_attempts = 5;
};

/// A browser driven over the W3C WebDriver protocol. Not safe for concurrent
/// use; one exploration thread owns a session.
class BrowserSession {
 public:
  static BrowserSession connect(const std::string& endpoint, const std::string& start_url, Viewport viewport,
                                SessionOptions options = {});

  BrowserSession(BrowserSession&&) noexcept;
  BrowserSession& operator=(BrowserSession&&) noexcept;
  ~BrowserSession();

  PageSnapshot snapshot();

  void type_text(const ElementHandle& element, std::string_view text);
  void click(const ElementHandle& element);

  /// Severe console entries accumulated since the previous call.
  std::vector<FailureRecord> console_failures();

  /// Navigation that is not a web action (used for recovery).
  void navigate(const std::string& url);
  /// Returns false when the element no longer exists.
  bool scroll_into_view(const ElementHandle& element);
  std::string read_value(const ElementHandle& element);
  std::string current_url();

  void close();
  bool is_open() const { return !session_id_.empty(); }

  const std::string& endpoint() const { return endpoint_; }
  const std::string& session_id() const { return session_id_; }
  Viewport viewport() const { return viewport_; }
  double device_pixel_ratio() const { return device_pixel_ratio_; }
  std::int64_t action_count() const { return actions_; }

 private:
  BrowserSession() = default;

  std::string locate(const ElementHandle& element);
  void wait_for_ready();
  void close_extra_windows();
  [[noreturn]] void rethrow_as_session_error(const std::exception& e);

  std::unique_ptr<webdriver::Client> client_;
  std::string endpoint_;
  std::string session_id_;
  std::string main_window_;
  Viewport viewport_;
  double device_pixel_ratio_ = 1.0;
  SessionOptions options_;
  std::int64_t actions_ = 0;
  std::uint64_t generation_ = 0;
  bool native_log_ = true;
};

}  // namespace vetl::driver
