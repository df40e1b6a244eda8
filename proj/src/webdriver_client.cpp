#include "vetl/webdriver_client.hpp"

#include <httplib.h>

#include "vetl/url.hpp"
#include "vetl/util.hpp"

namespace vetl::webdriver {

using nlohmann::json;

struct Client::Impl {
  std::unique_ptr<httplib::Client> http;
  std::string prefix;  // path prefix such as "/wd/hub"
};

Client::Client(const std::string& endpoint, std::chrono::seconds timeout) : impl_(std::make_unique<Impl>()) {
  auto parsed = url::parse(endpoint);
  if (!parsed || parsed->opaque) throw ProtocolError("transport", "malformed WebDriver endpoint: " + endpoint);
  impl_->http = std::make_unique<httplib::Client>(parsed->origin());
  impl_->http->set_connection_timeout(std::chrono::seconds(5));
  impl_->http->set_read_timeout(timeout);
  impl_->http->set_write_timeout(timeout);
  impl_->prefix = parsed->path == "/" ? "" : parsed->path;
  if (!impl_->prefix.empty() && impl_->prefix.back() == '/') impl_->prefix.pop_back();
}

Client::~Client() = default;
Client::Client(Client&&) noexcept = default;
Client& Client::operator=(Client&&) noexcept = default;

json Client::call(const std::string& method, const std::string& path, const json* body) {
  const std::string full = impl_->prefix + path;
  httplib::Result res{nullptr, httplib::Error::Unknown};
  if (method == "GET") {
    res = impl_->http->Get(full);
  } else if (method == "DELETE") {
    res = impl_->http->Delete(full);
  } else {
    res = impl_->http->Post(full, body ? body->dump() : std::string("{}"), "application/json; charset=utf-8");
  }
  if (!res) throw ProtocolError("transport", method + " " + full + ": " + httplib::to_string(res.error()));
  json parsed;
  try {
    parsed = res->body.empty() ? json::object() : json::parse(res->body);
  } catch (const json::parse_error&) {
    throw ProtocolError("unknown error", "non-JSON response (HTTP " + std::to_string(res->status) + ")");
  }
  json value = parsed.contains("value") ? parsed["value"] : json();
  if (res->status >= 400 || (value.is_object() && value.contains("error"))) {
    std::string err = value.is_object() && value.contains("error") ? value["error"].get<std::string>()
                                                                   : "unknown error";
    std::string msg = value.is_object() && value.contains("message") && value["message"].is_string()
                          ? value["message"].get<std::string>()
                          : "HTTP " + std::to_string(res->status);
    throw ProtocolError(err, msg);
  }
  return value;
}

std::string Client::session_path(const std::string& suffix) const { return "/session/" + session_id_ + suffix; }

json Client::status() { return call("GET", "/status"); }

std::string Client::new_session(const json& capabilities) {
  json body = {{"capabilities", capabilities}};
  json value = call("POST", "/session", &body);
  if (!value.contains("sessionId") || !value["sessionId"].is_string() || value["sessionId"].get<std::string>().empty()) {
    throw ProtocolError("session not created", "response carried no sessionId");
  }
  session_id_ = value["sessionId"].get<std::string>();
  return session_id_;
}

void Client::delete_session() {
  if (session_id_.empty()) return;
  call("DELETE", session_path(""));
  session_id_.clear();
}

void Client::navigate(const std::string& url) {
  json body = {{"url", url}};
  call("POST", session_path("/url"), &body);
}

std::string Client::current_url() { return call("GET", session_path("/url")).get<std::string>(); }

std::string Client::title() { return call("GET", session_path("/title")).get<std::string>(); }

json Client::execute_sync(const std::string& script, const json& args) {
  json body = {{"script", script}, {"args", args}};
  return call("POST", session_path("/execute/sync"), &body);
}

std::vector<std::uint8_t> Client::screenshot_png() {
  return base64_decode(call("GET", session_path("/screenshot")).get<std::string>());
}

std::string Client::find_element_css(const std::string& selector) {
  json body = {{"using", "css selector"}, {"value", selector}};
  json value = call("POST", session_path("/element"), &body);
  if (!value.contains(kElementKey)) throw ProtocolError("no such element", "missing element reference");
  return value[kElementKey].get<std::string>();
}

void Client::element_click(const std::string& id) {
  json body = json::object();
  call("POST", session_path("/element/" + id + "/click"), &body);
}

void Client::element_clear(const std::string& id) {
  json body = json::object();
  call("POST", session_path("/element/" + id + "/clear"), &body);
}

void Client::element_send_keys(const std::string& id, const std::string& text) {
  json body = {{"text", text}};
  call("POST", session_path("/element/" + id + "/value"), &body);
}

json Client::element_property(const std::string& id, const std::string& name) {
  return call("GET", session_path("/element/" + id + "/property/" + name));
}

void Client::set_window_rect(int width, int height) {
  json body = {{"width", width}, {"height", height}};
  call("POST", session_path("/window/rect"), &body);
}

std::string Client::window_handle() { return call("GET", session_path("/window")).get<std::string>(); }

std::vector<std::string> Client::window_handles() {
  return call("GET", session_path("/window/handles")).get<std::vector<std::string>>();
}

void Client::switch_to_window(const std::string& handle) {
  json body = {{"handle", handle}};
  call("POST", session_path("/window"), &body);
}

void Client::close_window() { call("DELETE", session_path("/window")); }

json Client::browser_log() {
  json body = {{"type", "browser"}};
  return call("POST", session_path("/se/log"), &body);
}

}  // namespace vetl::webdriver
