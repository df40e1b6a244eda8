#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <unistd.h>

#include "vetl/headless.hpp"

namespace vetl::testing_support {

inline std::string fixture_dir() { return VETL_FIXTURE_DIR; }

/// Static fixture server plus the built-in WebDriver server, both on free ports.
struct Stack {
  headless::StaticServer files{fixture_dir()};
  headless::WebDriverServer webdriver;

  Stack() {
    files.start();
    webdriver.start();
  }
  ~Stack() {
    webdriver.stop();
    files.stop();
  }
  std::string url(const std::string& path) const { return files.base_url() + "/" + path; }
  std::string endpoint() const { return webdriver.endpoint(); }
};

inline std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("vetl_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace vetl::testing_support
