#include <gtest/gtest.h>

#include <map>

#include "vetl/driver_scripts.hpp"
#include "vetl/headless.hpp"

using namespace vetl;
using namespace vetl::headless;

namespace {

// In-memory site: path -> body; unknown paths answer 404.
Fetcher site(std::map<std::string, std::string> pages) {
  return [pages](const std::string& u) {
    auto pos = u.find("://");
    auto slash = u.find('/', pos + 3);
    std::string path = slash == std::string::npos ? "/" : u.substr(slash);
    path = path.substr(0, path.find('?'));
    auto it = pages.find(path);
    if (it == pages.end()) return FetchResult{404, "<html><head><title>404</title></head><body></body></html>", ""};
    return FetchResult{200, it->second, ""};
  };
}

const char* kForm = R"(<html><head><title>Form</title></head><body>
<form action="/done"><input id="n" name="n" type="number" min="0" required><button id="go">Go</button></form>
<img src="/missing.png"></body></html>)";

}  // namespace

TEST(HeadlessBrowser, NavigateAndTitle) {
  Browser b(site({{"/", kForm}, {"/done", "<html><head><title>Done</title></head></html>"}}));
  b.navigate("http://site.test/");
  EXPECT_EQ(b.title(), "Form");
  EXPECT_EQ(b.current_url(), "http://site.test/");
}

TEST(HeadlessBrowser, NativeValidationBlocksSubmit) {
  Browser b(site({{"/", kForm}, {"/done", "<html><head><title>Done</title></head></html>"}}));
  b.navigate("http://site.test/");
  auto input = b.find_element("#n");
  auto go = b.find_element("#go");
  b.click(go);
  EXPECT_EQ(b.title(), "Form");
  b.send_keys(input, "-1");
  b.click(go);
  EXPECT_EQ(b.title(), "Form");
  b.clear(input);
  b.send_keys(input, "199");
  b.click(go);
  EXPECT_EQ(b.title(), "Done");
  EXPECT_EQ(b.current_url(), "http://site.test/done?n=199");
}

TEST(HeadlessBrowser, EnterKeySubmits) {
  Browser b(site({{"/", kForm}, {"/done", "<html><head><title>Done</title></head></html>"}}));
  b.navigate("http://site.test/");
  b.send_keys(b.find_element("#n"), std::string("5") + "\xEE\x80\x87");
  EXPECT_EQ(b.title(), "Done");
}

TEST(HeadlessBrowser, MissingImageLogsSevere) {
  Browser b(site({{"/", kForm}}));
  b.navigate("http://site.test/");
  auto log = b.take_log();
  ASSERT_EQ(log.size(), 1u);
  EXPECT_EQ(log[0]["level"], "SEVERE");
  EXPECT_TRUE(b.take_log().empty());
}

TEST(HeadlessBrowser, SnapshotStampsEveryElement) {
  Browser b(site({{"/", kForm}}));
  b.navigate("http://site.test/");
  auto snap = b.execute(std::string(driver::scripts::kSnapshot), nlohmann::json::array({"g1"}));
  EXPECT_EQ(snap["title"], "Form");
  EXPECT_NE(snap["html"].get<std::string>().find("data-vetl-node=\"g1-0\""), std::string::npos);
  EXPECT_EQ(snap["elements"].size(), b.document().elements().size());
}

TEST(HeadlessBrowser, ScreenshotHasViewportSize) {
  Browser b(site({{"/", kForm}}));
  b.set_viewport(640, 480);
  b.navigate("http://site.test/");
  auto img = decode_png(b.screenshot_png());
  EXPECT_EQ(img.width(), 640);
  EXPECT_EQ(img.height(), 480);
}

TEST(HeadlessBrowser, UnknownElementIsStale) {
  Browser b(site({{"/", kForm}}));
  b.navigate("http://site.test/");
  auto id = b.find_element("#go");
  b.navigate("http://site.test/");
  try {
    b.click(id);
    FAIL();
  } catch (const CommandError& e) {
    EXPECT_EQ(e.error(), "stale element reference");
  }
  EXPECT_THROW(b.find_element("#nope"), CommandError);
}

TEST(HeadlessLayout, HiddenElementsNotDisplayed) {
  auto doc = html::Document::parse(
      R"(<html><body><p>shown</p><p style="display:none">hidden</p><input type="hidden"></body></html>)");
  auto layout = layout_document(doc, 800);
  std::vector<bool> shown;
  for (const auto* e : doc.elements()) {
    if (e->is_element("p") || e->is_element("input")) shown.push_back(layout.box(e).displayed);
  }
  EXPECT_EQ(shown, (std::vector<bool>{true, false, false}));
}
