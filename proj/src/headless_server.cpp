#include <httplib.h>

#include <atomic>
#include <map>

#include "vetl/headless.hpp"
#include "vetl/util.hpp"

namespace vetl::headless {

using nlohmann::json;

struct WebDriverServer::Impl {
  ServerOptions options;
  httplib::Server server;
  std::thread thread;
  std::mutex mutex;
  std::map<std::string, std::unique_ptr<Browser>> sessions;
  std::uint64_t next_session = 0;
  int port = 0;

  Browser& browser(const std::string& id) {
    auto it = sessions.find(id);
    if (it == sessions.end()) throw CommandError("invalid session id", "unknown session " + id);
    return *it->second;
  }
};

namespace {

void reply(httplib::Response& res, const json& value) {
  res.status = 200;
  res.set_content(json{{"value", value}}.dump(), "application/json; charset=utf-8");
}

void reply_error(httplib::Response& res, const CommandError& e) {
  res.status = e.http_status();
  res.set_content(json{{"value", {{"error", e.error()}, {"message", e.what()}, {"stacktrace", ""}}}}.dump(),
                  "application/json; charset=utf-8");
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error&) {
    throw CommandError("invalid argument", "request body is not JSON");
  }
}

}  // namespace

WebDriverServer::WebDriverServer(ServerOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  auto& svr = impl_->server;
  Impl* self = impl_.get();

  // Wraps a handler with locking and W3C error translation.
  auto guarded = [self](auto fn) {
    return [self, fn](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(self->mutex);
      try {
        fn(req, res);
      } catch (const CommandError& e) {
        reply_error(res, e);
      } catch (const std::exception& e) {
        reply_error(res, CommandError("unknown error", e.what()));
      }
    };
  };

  svr.Get("/status", guarded([](const httplib::Request&, httplib::Response& res) {
            reply(res, {{"ready", true}, {"message", "vetl headless browser"}});
          }));

  svr.Post("/session", guarded([self](const httplib::Request& req, httplib::Response& res) {
             body_of(req);
             std::string id = "vetl-" + std::to_string(++self->next_session);
             auto browser = std::make_unique<Browser>(self->options.fetcher_factory());
             browser->set_viewport(self->options.viewport_width, self->options.viewport_height);
             browser->set_device_pixel_ratio(self->options.device_pixel_ratio);
             self->sessions[id] = std::move(browser);
             reply(res, {{"sessionId", id}, {"capabilities", {{"browserName", "vetl-headless"}}}});
           }));

  svr.Delete(R"(/session/([^/]+))", guarded([self](const httplib::Request& req, httplib::Response& res) {
               self->browser(req.matches[1]);
               self->sessions.erase(req.matches[1]);
               reply(res, nullptr);
             }));

  svr.Post(R"(/session/([^/]+)/url)", guarded([self](const httplib::Request& req, httplib::Response& res) {
             json body = body_of(req);
             if (!body.contains("url") || !body["url"].is_string()) throw CommandError("invalid argument", "url missing");
             self->browser(req.matches[1]).navigate(body["url"].get<std::string>());
             reply(res, nullptr);
           }));

  svr.Get(R"(/session/([^/]+)/url)", guarded([self](const httplib::Request& req, httplib::Response& res) {
            reply(res, self->browser(req.matches[1]).current_url());
          }));

  svr.Get(R"(/session/([^/]+)/title)", guarded([self](const httplib::Request& req, httplib::Response& res) {
            reply(res, self->browser(req.matches[1]).title());
          }));

  svr.Post(R"(/session/([^/]+)/execute/sync)", guarded([self](const httplib::Request& req, httplib::Response& res) {
             json body = body_of(req);
             reply(res, self->browser(req.matches[1])
                            .execute(body.value("script", ""), body.value("args", json::array())));
           }));

  svr.Get(R"(/session/([^/]+)/screenshot)", guarded([self](const httplib::Request& req, httplib::Response& res) {
            auto png = self->browser(req.matches[1]).screenshot_png();
            reply(res, vetl::base64_encode(png));
          }));

  svr.Post(R"(/session/([^/]+)/element)", guarded([self](const httplib::Request& req, httplib::Response& res) {
             json body = body_of(req);
             if (body.value("using", "") != "css selector") {
               throw CommandError("invalid argument", "only css selector lookups are supported");
             }
             auto id = self->browser(req.matches[1]).find_element(body.value("value", ""));
             reply(res, {{"element-6066-11e4-a52e-4f735466cecf", id}});
           }));

  svr.Post(R"(/session/([^/]+)/element/([^/]+)/click)",
           guarded([self](const httplib::Request& req, httplib::Response& res) {
             self->browser(req.matches[1]).click(req.matches[2]);
             reply(res, nullptr);
           }));

  svr.Post(R"(/session/([^/]+)/element/([^/]+)/clear)",
           guarded([self](const httplib::Request& req, httplib::Response& res) {
             self->browser(req.matches[1]).clear(req.matches[2]);
             reply(res, nullptr);
           }));

  svr.Post(R"(/session/([^/]+)/element/([^/]+)/value)",
           guarded([self](const httplib::Request& req, httplib::Response& res) {
             json body = body_of(req);
             self->browser(req.matches[1]).send_keys(req.matches[2], body.value("text", ""));
             reply(res, nullptr);
           }));

  svr.Get(R"(/session/([^/]+)/element/([^/]+)/property/([^/]+))",
          guarded([self](const httplib::Request& req, httplib::Response& res) {
            reply(res, self->browser(req.matches[1]).property(req.matches[2], req.matches[3]));
          }));

  svr.Post(R"(/session/([^/]+)/window/rect)", guarded([self](const httplib::Request& req, httplib::Response& res) {
             json body = body_of(req);
             auto& b = self->browser(req.matches[1]);
             b.set_viewport(body.value("width", b.viewport_width()), body.value("height", b.viewport_height()));
             reply(res, {{"x", 0}, {"y", 0}, {"width", b.viewport_width()}, {"height", b.viewport_height()}});
           }));

  svr.Get(R"(/session/([^/]+)/window/handles)", guarded([self](const httplib::Request& req, httplib::Response& res) {
            self->browser(req.matches[1]);
            reply(res, json::array({"main"}));
          }));

  svr.Get(R"(/session/([^/]+)/window)", guarded([self](const httplib::Request& req, httplib::Response& res) {
            self->browser(req.matches[1]);
            reply(res, "main");
          }));

  svr.Post(R"(/session/([^/]+)/window)", guarded([self](const httplib::Request& req, httplib::Response& res) {
             self->browser(req.matches[1]);
             if (body_of(req).value("handle", "") != "main") throw CommandError("no such window", "unknown handle");
             reply(res, nullptr);
           }));

  svr.Delete(R"(/session/([^/]+)/window)", guarded([self](const httplib::Request& req, httplib::Response& res) {
               self->browser(req.matches[1]);
               self->sessions.erase(req.matches[1]);
               reply(res, json::array());
             }));

  svr.Post(R"(/session/([^/]+)/se/log)", guarded([self](const httplib::Request& req, httplib::Response& res) {
             reply(res, self->browser(req.matches[1]).take_log());
           }));

  svr.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.status == 404 && res.body.empty()) {
      reply_error(res, CommandError("unknown command", "unknown command"));
    }
  });
}

WebDriverServer::~WebDriverServer() { stop(); }

int WebDriverServer::start(int port) {
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
  } else if (impl_->server.bind_to_port("127.0.0.1", port)) {
    impl_->port = port;
  } else {
    impl_->port = -1;
  }
  if (impl_->port <= 0) throw std::runtime_error("cannot bind WebDriver server");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return impl_->port;
}

void WebDriverServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string WebDriverServer::endpoint() const { return "http://127.0.0.1:" + std::to_string(impl_->port); }

void WebDriverServer::with_browser(const std::string& session_id, const std::function<void(Browser&)>& fn) {
  std::lock_guard lock(impl_->mutex);
  fn(impl_->browser(session_id));
}

std::vector<std::string> WebDriverServer::session_ids() {
  std::lock_guard lock(impl_->mutex);
  std::vector<std::string> ids;
  for (const auto& [id, b] : impl_->sessions) ids.push_back(id);
  return ids;
}

}  // namespace vetl::headless
