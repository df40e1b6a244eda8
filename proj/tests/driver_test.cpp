#include <gtest/gtest.h>

#include "test_support.hpp"
#include "vetl/driver.hpp"

using namespace vetl;
using namespace vetl::driver;
using vetl::testing_support::Stack;

namespace {

const ElementGeometry* by_html_id(const PageSnapshot& snap, const std::string& id) {
  // the stamp attribute precedes or follows id; search the serialized tag
  auto pos = snap.html.find("id=\"" + id + "\"");
  if (pos == std::string::npos) return nullptr;
  auto open = snap.html.rfind('<', pos);
  auto close = snap.html.find('>', pos);
  std::string tag = snap.html.substr(open, close - open);
  auto a = tag.find(std::string(kNodeAttribute) + "=\"");
  if (a == std::string::npos) return nullptr;
  a += std::string(kNodeAttribute).size() + 2;
  return snap.find_geometry(tag.substr(a, tag.find('"', a) - a));
}

ElementHandle handle(const PageSnapshot& snap, const std::string& id) {
  const auto* g = by_html_id(snap, id);
  if (!g) throw std::runtime_error("no element " + id);
  return {g->node_id, g->rect, g->displayed, g->enabled};
}

ElementHandle button_by_text(const PageSnapshot& snap, const std::string& text) {
  auto pos = snap.html.find(">" + text + "</button>");
  auto open = snap.html.rfind("<button", pos);
  std::string tag = snap.html.substr(open, pos - open);
  auto a = tag.find(std::string(kNodeAttribute) + "=\"") + std::string(kNodeAttribute).size() + 2;
  const auto* g = snap.find_geometry(tag.substr(a, tag.find('"', a) - a));
  return {g->node_id, g->rect, g->displayed, g->enabled};
}

}  // namespace

TEST(Driver, ConnectFailsWithoutServer) {
  try {
    BrowserSession::connect("http://127.0.0.1:9", "http://127.0.0.1:9/", {});
    FAIL();
  } catch (const DriverError& e) {
    EXPECT_EQ(e.code(), Errc::connection_failed);
  }
}

TEST(Driver, UnreachableStartUrlIsNavigationFailure) {
  Stack s;
  try {
    BrowserSession::connect(s.endpoint(), "http://127.0.0.1:9/nothing.html", {});
    FAIL();
  } catch (const DriverError& e) {
    EXPECT_EQ(e.code(), Errc::navigation_failed);
  }
  EXPECT_THROW(BrowserSession::connect(s.endpoint(), "not a url", {}), DriverError);
}

TEST(Driver, SnapshotOfSplitty) {
  Stack s;
  auto session = BrowserSession::connect(s.endpoint(), s.url("splitty/index.html"), {1280, 800});
  auto snap = session.snapshot();
  EXPECT_EQ(snap.title, "SplittyPie");
  EXPECT_EQ(snap.url, s.url("splitty/index.html"));
  EXPECT_EQ(snap.screenshot.width(), 1280);
  EXPECT_EQ(snap.screenshot.height(), 800);
  const auto* amount = by_html_id(snap, "amount");
  ASSERT_TRUE(amount);
  EXPECT_TRUE(amount->displayed);
  EXPECT_GT(amount->rect.width, 0);
  ASSERT_TRUE(amount->value);
  EXPECT_EQ(*amount->value, "");
  auto again = session.snapshot();
  EXPECT_EQ(again.page_token, snap.page_token);
  EXPECT_EQ(session.action_count(), 0);
}

TEST(Driver, TypeThenSubmit) {
  Stack s;
  auto session = BrowserSession::connect(s.endpoint(), s.url("splitty/index.html"), {});
  auto snap = session.snapshot();
  session.click(button_by_text(snap, "Create"));
  EXPECT_EQ(session.current_url(), s.url("splitty/index.html"));  // blocked by required fields

  snap = session.snapshot();
  session.type_text(handle(snap, "eventName"), "Team dinner");
  session.type_text(handle(snap, "amount"), "199");
  EXPECT_EQ(session.read_value(handle(snap, "amount")), "199");
  auto filled = session.snapshot();
  EXPECT_EQ(*by_html_id(filled, "amount")->value, "199");
  session.click(button_by_text(filled, "Create"));
  auto after = session.snapshot();
  EXPECT_EQ(after.url, s.url("splitty/event/created.html?eventName=Team+dinner&amount=199"));
  EXPECT_NE(after.page_token, snap.page_token);
  EXPECT_EQ(session.action_count(), 4);
}

TEST(Driver, StaleHandleAfterNavigation) {
  Stack s;
  auto session = BrowserSession::connect(s.endpoint(), s.url("splitty/index.html"), {});
  auto snap = session.snapshot();
  session.navigate(s.url("splitty/about.html"));
  try {
    session.click(button_by_text(snap, "Create"));
    FAIL();
  } catch (const DriverError& e) {
    EXPECT_EQ(e.code(), Errc::stale_element);
  }
  EXPECT_EQ(session.action_count(), 0);
}

TEST(Driver, ConsoleFailuresDrained) {
  Stack s;
  auto session = BrowserSession::connect(s.endpoint(), s.url("flow/contact-sent.html"), {});
  auto failures = session.console_failures();
  ASSERT_EQ(failures.size(), 1u);
  EXPECT_EQ(failures[0].level, "SEVERE");
  EXPECT_NE(failures[0].message.find("missing-banner.png"), std::string::npos);
  EXPECT_TRUE(session.console_failures().empty());
  session.navigate(s.url("flow/nope.html"));
  EXPECT_EQ(session.console_failures().size(), 1u);
}

TEST(Driver, MetaRefreshFollowed) {
  Stack s;
  auto session = BrowserSession::connect(s.endpoint(), s.url("pages/redirect.html"), {});
  auto snap = session.snapshot();
  EXPECT_EQ(snap.title, "Landing");
}

TEST(Driver, SnapshotConsistentWhilePageChanges) {
  Stack s;
  auto session = BrowserSession::connect(s.endpoint(), s.url("splitty/index.html"), {});
  auto ids = s.webdriver.session_ids();
  ASSERT_EQ(ids.size(), 1u);
  s.webdriver.with_browser(ids[0], [&](headless::Browser& b) { b.navigate_after_commands(2, s.url("flow/index.html")); });
  auto snap = session.snapshot();
  // whatever document the snapshot reports, all fields agree on it
  bool flow = snap.title == "Flow Shop";
  EXPECT_EQ(flow, snap.url.find("/flow/") != std::string::npos);
  EXPECT_EQ(flow, snap.html.find("Flow Shop") != std::string::npos);
}

TEST(Driver, ScrollIntoView) {
  Stack s;
  auto session = BrowserSession::connect(s.endpoint(), s.url("pages/tall.html"), {800, 400});
  auto snap = session.snapshot();
  auto city = handle(snap, "city");
  EXPECT_GT(city.rect.bottom(), 400);
  EXPECT_TRUE(session.scroll_into_view(city));
  auto scrolled = session.snapshot();
  EXPECT_GT(scrolled.scroll_y, 0);
  const auto* g = by_html_id(scrolled, "city");
  EXPECT_GE(g->rect.y - scrolled.scroll_y, 0);
  EXPECT_LE(g->rect.bottom() - scrolled.scroll_y, 400);
}

TEST(Driver, SessionLostWhenServerStops) {
  Stack s;
  auto session = BrowserSession::connect(s.endpoint(), s.url("splitty/index.html"), {});
  s.webdriver.stop();
  try {
    session.snapshot();
    FAIL();
  } catch (const DriverError& e) {
    EXPECT_EQ(e.code(), Errc::session_lost);
  }
}
