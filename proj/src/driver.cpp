#include "vetl/driver.hpp"

#include <thread>

#include "vetl/driver_scripts.hpp"
#include "vetl/url.hpp"
#include "vetl/webdriver_client.hpp"

namespace vetl::driver {

using nlohmann::json;
using webdriver::ProtocolError;

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::connection_failed: return "ConnectionFailed";
    case Errc::navigation_failed: return "NavigationFailed";
    case Errc::session_lost: return "SessionLost";
    case Errc::stale_element: return "StaleElement";
    case Errc::not_interactable: return "NotInteractable";
  }
  return "DriverError";
}

const ElementGeometry* PageSnapshot::find_geometry(std::string_view node_id) const {
  for (const auto& g : geometry) {
    if (g.node_id == node_id) return &g;
  }
  return nullptr;
}

namespace {

bool is_session_failure(const ProtocolError& e) {
  return e.is_transport() || e.error() == "invalid session id" || e.error() == "no such window";
}

bool is_stale(const ProtocolError& e) {
  return e.error() == "no such element" || e.error() == "stale element reference";
}

bool is_not_interactable(const ProtocolError& e) {
  return e.error() == "element not interactable" || e.error() == "element click intercepted" ||
         e.error() == "invalid element state";
}

json make_capabilities(const SessionOptions& options) {
  json always = {{"goog:loggingPrefs", {{"browser", "ALL"}}}};
  if (!options.browser_binary.empty() || !options.browser_args.empty()) {
    json chrome = json::object();
    if (!options.browser_binary.empty()) chrome["binary"] = options.browser_binary;
    if (!options.browser_args.empty()) chrome["args"] = options.browser_args;
    always["goog:chromeOptions"] = chrome;
  }
  return {{"alwaysMatch", always}};
}

}  // namespace

BrowserSession::BrowserSession(BrowserSession&&) noexcept = default;
BrowserSession& BrowserSession::operator=(BrowserSession&&) noexcept = default;

BrowserSession::~BrowserSession() { close(); }

BrowserSession BrowserSession::connect(const std::string& endpoint, const std::string& start_url, Viewport viewport,
                                       SessionOptions options) {
  if (viewport.width <= 0 || viewport.height <= 0) {
    throw std::invalid_argument("viewport dimensions must be positive");
  }
  BrowserSession session;
  session.endpoint_ = endpoint;
  session.options_ = std::move(options);
  try {
    session.client_ = std::make_unique<webdriver::Client>(endpoint);
    session.client_->status();
    session.session_id_ = session.client_->new_session(make_capabilities(session.options_));
  } catch (const ProtocolError& e) {
    throw DriverError(Errc::connection_failed, e.what());
  }

  try {
    session.client_->set_window_rect(viewport.width, viewport.height);
    auto measured = session.client_->execute_sync(scripts::kViewport);
    int vw = measured.value("vw", viewport.width);
    int vh = measured.value("vh", viewport.height);
    if (vw != viewport.width || vh != viewport.height) {
      // Window chrome eats into the viewport on real browsers; compensate once.
      session.client_->set_window_rect(2 * viewport.width - vw, 2 * viewport.height - vh);
    }
    session.device_pixel_ratio_ = measured.value("dpr", 1.0);
    session.viewport_ = viewport;
    session.main_window_ = session.client_->window_handle();
  } catch (const ProtocolError& e) {
    throw DriverError(Errc::connection_failed, e.what());
  }

  auto parsed = url::parse(start_url);
  if (!parsed) throw DriverError(Errc::navigation_failed, "malformed start URL: " + start_url);
  try {
    session.client_->navigate(parsed->str());
  } catch (const ProtocolError& e) {
    if (is_session_failure(e) && e.is_transport()) throw DriverError(Errc::connection_failed, e.what());
    throw DriverError(Errc::navigation_failed, e.what());
  }
  return session;
}

void BrowserSession::rethrow_as_session_error(const std::exception& e) {
  throw DriverError(Errc::session_lost, e.what());
}

PageSnapshot BrowserSession::snapshot() {
  if (!is_open()) throw DriverError(Errc::session_lost, "session closed");
  std::string last_error = "page kept navigating";
  for (int attempt = 0; attempt < options_.max_snapshot_attempts; ++attempt) {
    try {
      const std::string stamp = "g" + std::to_string(++generation_);
      json first = client_->execute_sync(scripts::kSnapshot, json::array({stamp}));
      auto png = client_->screenshot_png();
      json check = client_->execute_sync(scripts::kPage);
      if (check.value("url", "") != first.value("url", "") || check.value("token", "") != first.value("token", "")) {
        continue;  // a navigation interleaved with the capture
      }
      PageSnapshot snap;
      snap.url = first.value("url", "");
      snap.title = first.value("title", "");
      snap.html = first.value("html", "");
      snap.page_token = first.value("token", "");
      snap.device_pixel_ratio = first.value("dpr", 1.0);
      snap.scroll_x = first.value("sx", 0.0);
      snap.scroll_y = first.value("sy", 0.0);
      snap.viewport = {first.value("vw", viewport_.width), first.value("vh", viewport_.height)};
      snap.screenshot = decode_png(png);
      for (const auto& e : first.value("elements", json::array())) {
        ElementGeometry g;
        g.node_id = e.value("id", "");
        g.rect = {e.value("x", 0.0), e.value("y", 0.0), std::max(0.0, e.value("w", 0.0)),
                  std::max(0.0, e.value("h", 0.0))};
        g.displayed = e.value("displayed", false);
        g.enabled = e.value("enabled", true);
        if (e.contains("value") && e["value"].is_string()) g.value = e["value"].get<std::string>();
        snap.geometry.push_back(std::move(g));
      }
      device_pixel_ratio_ = snap.device_pixel_ratio;
      return snap;
    } catch (const ProtocolError& e) {
      if (is_session_failure(e)) rethrow_as_session_error(e);
      last_error = e.what();
    } catch (const std::runtime_error& e) {
      last_error = e.what();  // undecodable screenshot mid-navigation
    }
  }
  throw DriverError(Errc::session_lost, "no consistent snapshot: " + last_error);
}

std::string BrowserSession::locate(const ElementHandle& element) {
  try {
    return client_->find_element_css(std::string("[") + kNodeAttribute + "=\"" + element.remote_id + "\"]");
  } catch (const ProtocolError& e) {
    if (is_session_failure(e)) rethrow_as_session_error(e);
    if (is_stale(e)) throw DriverError(Errc::stale_element, element.remote_id);
    throw DriverError(Errc::not_interactable, e.what());
  }
}

void BrowserSession::type_text(const ElementHandle& element, std::string_view text) {
  if (!is_open()) throw DriverError(Errc::session_lost, "session closed");
  if (!element.displayed || !element.enabled) throw DriverError(Errc::not_interactable, element.remote_id);
  auto id = locate(element);
  try {
    client_->element_clear(id);
    if (!text.empty()) client_->element_send_keys(id, std::string(text));
  } catch (const ProtocolError& e) {
    if (is_session_failure(e)) rethrow_as_session_error(e);
    if (is_stale(e)) throw DriverError(Errc::stale_element, element.remote_id);
    throw DriverError(Errc::not_interactable, e.what());
  }
  ++actions_;
}

void BrowserSession::click(const ElementHandle& element) {
  if (!is_open()) throw DriverError(Errc::session_lost, "session closed");
  if (!element.displayed || !element.enabled) throw DriverError(Errc::not_interactable, element.remote_id);
  auto id = locate(element);
  try {
    client_->element_click(id);
  } catch (const ProtocolError& e) {
    if (is_session_failure(e)) rethrow_as_session_error(e);
    if (is_stale(e)) throw DriverError(Errc::stale_element, element.remote_id);
    if (is_not_interactable(e)) throw DriverError(Errc::not_interactable, e.what());
    throw DriverError(Errc::not_interactable, e.what());
  }
  ++actions_;
  wait_for_ready();
  close_extra_windows();
}

void BrowserSession::wait_for_ready() {
  auto deadline = std::chrono::steady_clock::now() + options_.navigation_timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    try {
      if (client_->execute_sync(scripts::kPage).value("ready", "") == "complete") return;
    } catch (const ProtocolError& e) {
      if (e.is_transport() || e.error() == "invalid session id") rethrow_as_session_error(e);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

void BrowserSession::close_extra_windows() {
  try {
    auto handles = client_->window_handles();
    if (handles.size() <= 1) return;
    for (const auto& h : handles) {
      if (h == main_window_) continue;
      client_->switch_to_window(h);
      client_->close_window();
    }
    client_->switch_to_window(main_window_);
  } catch (const ProtocolError& e) {
    if (is_session_failure(e)) rethrow_as_session_error(e);
  }
}

std::vector<FailureRecord> BrowserSession::console_failures() {
  if (!is_open()) throw DriverError(Errc::session_lost, "session closed");
  std::vector<FailureRecord> out;
  json entries;
  try {
    if (native_log_) {
      try {
        entries = client_->browser_log();
      } catch (const ProtocolError& e) {
        if (is_session_failure(e)) throw;
        native_log_ = false;
      }
    }
    if (!native_log_) entries = client_->execute_sync(scripts::kDrain);
  } catch (const ProtocolError& e) {
    rethrow_as_session_error(e);
  }
  if (!entries.is_array()) return out;
  for (const auto& e : entries) {
    FailureRecord r;
    if (native_log_) {
      r.level = e.value("level", "");
      if (r.level != "SEVERE") continue;
      r.message = e.value("message", "");
      r.timestamp_ms = e.value("timestamp", std::int64_t{0});
      r.source_url = e.value("url", "");
      if (r.source_url.empty()) {
        auto first = r.message.substr(0, r.message.find(' '));
        if (url::parse(first)) r.source_url = first;
      }
    } else {
      r.level = "SEVERE";
      r.message = e.value("m", "");
      r.timestamp_ms = e.value("t", std::int64_t{0});
      r.source_url = e.value("s", "");
    }
    out.push_back(std::move(r));
  }
  return out;
}

void BrowserSession::navigate(const std::string& target) {
  if (!is_open()) throw DriverError(Errc::session_lost, "session closed");
  auto parsed = url::parse(target);
  if (!parsed) throw DriverError(Errc::navigation_failed, "malformed URL: " + target);
  try {
    client_->navigate(parsed->str());
  } catch (const ProtocolError& e) {
    if (is_session_failure(e)) rethrow_as_session_error(e);
    throw DriverError(Errc::navigation_failed, e.what());
  }
}

bool BrowserSession::scroll_into_view(const ElementHandle& element) {
  try {
    return client_->execute_sync(scripts::kScroll, json::array({element.remote_id})).get<bool>();
  } catch (const ProtocolError& e) {
    if (is_session_failure(e)) rethrow_as_session_error(e);
    return false;
  }
}

std::string BrowserSession::read_value(const ElementHandle& element) {
  auto id = locate(element);
  try {
    auto v = client_->element_property(id, "value");
    return v.is_string() ? v.get<std::string>() : std::string{};
  } catch (const ProtocolError& e) {
    if (is_session_failure(e)) rethrow_as_session_error(e);
    throw DriverError(Errc::stale_element, e.what());
  }
}

std::string BrowserSession::current_url() {
  try {
    return client_->current_url();
  } catch (const ProtocolError& e) {
    rethrow_as_session_error(e);
  }
}

void BrowserSession::close() {
  if (!client_ || session_id_.empty()) return;
  try {
    client_->delete_session();
  } catch (const ProtocolError&) {
  }
  session_id_.clear();
}

}  // namespace vetl::driver
