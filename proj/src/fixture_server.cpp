#include <httplib.h>

#include <filesystem>

#include "vetl/headless.hpp"

namespace vetl::headless {

struct StaticServer::Impl {
  httplib::Server server;
  std::thread thread;
};

StaticServer::StaticServer(std::string root_dir) : impl_(std::make_unique<Impl>()), root_(std::move(root_dir)) {
  if (!std::filesystem::is_directory(root_)) throw std::runtime_error("fixture directory not found: " + root_);
  impl_->server.set_mount_point("/", root_);
  impl_->server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (res.status != 404) return;
    res.set_content("<!DOCTYPE html><html><head><title>404 Not Found</title></head><body><h1>Not Found</h1><p>" +
                        req.path + " does not exist.</p></body></html>",
                    "text/html; charset=utf-8");
  });
}

StaticServer::~StaticServer() { stop(); }

int StaticServer::start(int port) {
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port("127.0.0.1");
  } else {
    port_ = impl_->server.bind_to_port("127.0.0.1", port) ? port : -1;
  }
  if (port_ <= 0) throw std::runtime_error("cannot bind fixture server");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

void StaticServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string StaticServer::base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

}  // namespace vetl::headless
