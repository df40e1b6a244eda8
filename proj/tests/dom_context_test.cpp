#include <gtest/gtest.h>

#include <deque>
#include <random>
#include <unordered_map>

#include "vetl/dom_context.hpp"
#include "vetl/util.hpp"

using namespace vetl;
using namespace vetl::dom;

namespace {

std::vector<std::string> texts(const std::vector<ConstraintDescription>& cs) {
  std::vector<std::string> out;
  for (const auto& c : cs) out.push_back(c.text);
  return out;
}

std::vector<std::string> constraints_of(const std::string& control) {
  auto page = ParsedPage::from_html("<html><body><form>" + control + "</form></body></html>");
  auto widgets = detect_input_widgets(page);
  if (widgets.empty()) return {"<no widget>"};
  return texts(widgets[0].constraints);
}

// Undirected BFS over the element tree from `from`; oracle for dom_distance.
std::unordered_map<const html::Node*, int> bfs(const html::Node& from) {
  std::unordered_map<const html::Node*, int> dist{{&from, 0}};
  std::deque<const html::Node*> q{&from};
  while (!q.empty()) {
    const html::Node* n = q.front();
    q.pop_front();
    std::vector<const html::Node*> next;
    if (n->parent()) next.push_back(n->parent());
    for (const auto& c : n->children()) next.push_back(c.get());
    for (const html::Node* m : next) {
      if (dist.emplace(m, dist[n] + 1).second) q.push_back(m);
    }
  }
  return dist;
}

std::string random_tree(std::mt19937_64& rng, int max_elements) {
  static const char* containers[] = {"div", "section", "form", "span", "p", "li"};
  std::uniform_int_distribution<int> pick(0, 9);
  std::string html = "<html><body>";
  int count = 2, depth = 0, inputs = 0;
  std::vector<std::string> open;
  while (count < max_elements - 2) {
    int r = pick(rng);
    if (r < 3 && depth < 8) {
      std::string tag = containers[pick(rng) % 6];
      html += "<" + tag + ">";
      open.push_back(tag);
      ++depth;
    } else if (r < 5 && !open.empty()) {
      html += "</" + open.back() + ">";
      open.pop_back();
      --depth;
      continue;
    } else if (r < 7) {
      html += "<button>b" + std::to_string(count) + "</button>";
    } else if (r < 8) {
      html += "<a href=\"#" + std::to_string(count) + "\">l" + std::to_string(count) + "</a>";
    } else if (r < 9 || inputs == 0) {
      html += "<input name=\"i" + std::to_string(count) + "\">";
      ++inputs;
    } else {
      html += "<em>t</em>";
    }
    ++count;
  }
  while (!open.empty()) {
    html += "</" + open.back() + ">";
    open.pop_back();
  }
  return html + "<button>tail</button><input name=\"last\"></body></html>";
}

}  // namespace

TEST(Constraints, TableRows) {
  EXPECT_EQ(constraints_of(R"(<input type="text" maxlength="12">)"),
            std::vector<std::string>{"maximum length of text is 12"});
  EXPECT_EQ(constraints_of(R"(<input minlength="3">)"), std::vector<std::string>{"minimum length of text is 3"});
  EXPECT_EQ(constraints_of(R"(<input type="password" maxlength="8" minlength="4">)"),
            (std::vector<std::string>{"maximum length of password is 8", "minimum length of password is 4"}));
  EXPECT_EQ(constraints_of(R"(<input type="email" multiple>)"),
            std::vector<std::string>{"multiple emails are allowed, with each email separated by a comma"});
  EXPECT_EQ(constraints_of(R"(<input type="number" max="20">)"),
            std::vector<std::string>{"maximum value of number is 20"});
  EXPECT_EQ(constraints_of(R"(<input type="number" min="1" step="2">)"),
            (std::vector<std::string>{"minimum value of number is 1", "number interval is 2 since 1"}));
  EXPECT_EQ(constraints_of(R"(<input type="tel" pattern="[0-9]{3}">)"),
            std::vector<std::string>{"telephone number has regular expression pattern [0-9]{3}"});
  EXPECT_EQ(constraints_of("<textarea></textarea>"), std::vector<std::string>{"multi-line input is allowed"});
}

TEST(Constraints, SlashRowsYieldNothing) {
  EXPECT_TRUE(constraints_of(R"(<input type="search" maxlength="5" pattern="x">)").empty());
  EXPECT_TRUE(constraints_of(R"(<input type="url" maxlength="5">)").empty());
  EXPECT_TRUE(constraints_of(R"(<input type="email" maxlength="5">)").empty());
}

TEST(Constraints, StepWithoutMinStartsAtZero) {
  EXPECT_EQ(constraints_of(R"(<input type="number" step="5">)"),
            std::vector<std::string>{"number interval is 5 since 0"});
}

TEST(Constraints, AttributeNamesCaseInsensitive) {
  EXPECT_EQ(constraints_of(R"(<INPUT TYPE="Number" MIN="0">)"),
            std::vector<std::string>{"minimum value of number is 0"});
}

TEST(Widgets, DetectsTextualInputsOnly) {
  auto page = ParsedPage::from_html(R"(<html><body>
    <input id="a"><input type="checkbox"><input type="radio"><input type="file"><input type="date">
    <input type="hidden" name="h"><input type="submit"><input type="email" id="e"><textarea id="t"></textarea>
    <input type="weird" id="w"><input id="ro" readonly><input id="dis" disabled>
    </body></html>)");
  auto widgets = detect_input_widgets(page);
  std::vector<std::string> ids;
  for (const auto& w : widgets) ids.push_back(w.attrs.count("id") ? w.attrs.at("id") : "?");
  EXPECT_EQ(ids, (std::vector<std::string>{"a", "e", "t", "w"}));
  EXPECT_EQ(widgets[3].input_type, "text");
  EXPECT_EQ(widgets[2].tag, "textarea");
}

TEST(Widgets, FilledMeansNonBlankValue) {
  auto page = ParsedPage::from_html(
      R"(<html><body><input id="a" value="x"><input id="b" value="   "><input id="c"></body></html>)");
  auto widgets = detect_input_widgets(page);
  ASSERT_EQ(widgets.size(), 3u);
  EXPECT_TRUE(widgets[0].filled);
  EXPECT_FALSE(widgets[1].filled);
  EXPECT_FALSE(widgets[2].filled);
}

TEST(Context, GlobalIsTitle) {
  auto page = ParsedPage::from_html("<html><head><title> SplittyPie </title></head><body></body></html>");
  EXPECT_EQ(global_context(page), "SplittyPie");
  EXPECT_EQ(global_context(ParsedPage::from_html("<html><body></body></html>")), "");
}

TEST(Context, LocalPrefersNearestPrecedingText) {
  auto page = ParsedPage::from_html(R"(<html><body>
    <form><div><span>How much? USD</span> <input type="number" id="amount"> <span>after</span></div></form>
    </body></html>)");
  auto widgets = detect_input_widgets(page);
  ASSERT_EQ(widgets.size(), 1u);
  EXPECT_EQ(widgets[0].local_context, "How much? USD");
}

TEST(Context, LocalFallsBackToFollowingText) {
  auto page = ParsedPage::from_html(R"(<html><body><div><input id="x"><label>Name</label></div></body></html>)");
  EXPECT_EQ(detect_input_widgets(page)[0].local_context, "Name");
}

TEST(Context, LocalEmptyWhenNoText) {
  auto page = ParsedPage::from_html(R"(<html><body><div><input id="x"></div></body></html>)");
  EXPECT_EQ(detect_input_widgets(page)[0].local_context, "");
}

TEST(Context, LocalTruncated) {
  std::string label(300, 'z');
  auto page = ParsedPage::from_html("<html><body><div><span>" + label + "</span><input></div></body></html>");
  EXPECT_EQ(detect_input_widgets(page)[0].local_context.size(), 120u);
}

TEST(Candidates, KindsAndOrder) {
  auto page = ParsedPage::from_html(R"html(<html><body>
    <a href="x.html">link</a><a>no href</a><button>b</button><input type="submit" value="go">
    <div role="button">r</div><span onclick="f()">c</span><button disabled>off</button>
    <button style="display:none">hidden</button>
    </body></html>)html");
  auto c = candidate_elements(page);
  ASSERT_EQ(c.size(), 5u);
  EXPECT_EQ(c[0].kind, ElementKind::link);
  EXPECT_EQ(c[1].kind, ElementKind::button);
  EXPECT_EQ(c[2].kind, ElementKind::submit_input);
  EXPECT_EQ(c[3].kind, ElementKind::clickable_other);
  EXPECT_EQ(c[4].kind, ElementKind::clickable_other);
  CandidateKinds only_buttons{true, false, false, false, false};
  EXPECT_EQ(candidate_elements(page, only_buttons).size(), 1u);
}

TEST(Candidates, FiveButtonsDistinctKeys) {
  auto page = ParsedPage::from_html(
      "<html><body><div><button>Go</button><button>Go</button><button>Go</button><button>Go</button>"
      "<button>Go</button></div></body></html>");
  auto c = candidate_elements(page);
  ASSERT_EQ(c.size(), 5u);
  std::set<ElementKey> keys;
  for (const auto& e : c) keys.insert(e.key);
  EXPECT_EQ(keys.size(), 5u);
}

TEST(Candidates, EmptyPage) {
  EXPECT_TRUE(candidate_elements(ParsedPage::from_html("<html><body><p>x</p></body></html>")).empty());
}

TEST(ElementKeys, DeterministicAndIgnoreStamp) {
  std::string html = "<html><body><form id=f><input name=q><button>Search</button></form></body></html>";
  auto a = ParsedPage::from_html(html);
  auto b = ParsedPage::from_html(html);
  auto ca = candidate_elements(a), cb = candidate_elements(b);
  ASSERT_EQ(ca.size(), 1u);
  EXPECT_EQ(ca[0].key, cb[0].key);
  auto stamped = ParsedPage::from_html(
      "<html><body><form id=f><input name=q><button data-vetl-node=\"g9-4\">Search</button></form></body></html>");
  EXPECT_EQ(candidate_elements(stamped)[0].key, ca[0].key);
  EXPECT_EQ(ca[0].key.value.rfind("button:", 0), 0u);
}

TEST(Distance, BasicCases) {
  auto page = ParsedPage::from_html(
      "<html><body><div id=g><div id=p1><span id=c1></span></div><div id=p2><span id=c2></span></div></div>"
      "</body></html>");
  const auto& doc = page.document();
  auto by_id = [&](const char* id) {
    return doc.find_if([&](const html::Node& n) { return n.attr("id") && *n.attr("id") == id; });
  };
  EXPECT_EQ(dom_distance(*by_id("c1"), *by_id("c1")), 0);
  EXPECT_EQ(dom_distance(*by_id("p1"), *by_id("c1")), 1);
  EXPECT_EQ(dom_distance(*by_id("c1"), *by_id("c2")), 4);
  EXPECT_EQ(dom_distance(*by_id("g"), *by_id("c2")), 2);
}

TEST(NearestButton, PicksClosestThenEarliest) {
  auto page = ParsedPage::from_html(R"(<html><body>
    <div><button id=far>far</button></div>
    <form><div><input id=w></div><button id=near>near</button><button id=near2>near2</button></form>
    </body></html>)");
  auto widgets = detect_input_widgets(page);
  ASSERT_EQ(widgets.size(), 1u);
  auto e = nearest_button(page, widgets[0]);
  EXPECT_EQ(*e.node->attr("id"), "near");
}

TEST(NearestButton, NoCandidates) {
  auto page = ParsedPage::from_html("<html><body><input></body></html>");
  auto widgets = detect_input_widgets(page);
  try {
    nearest_button(page, widgets[0]);
    FAIL();
  } catch (const DomError& e) {
    EXPECT_EQ(e.code(), Errc::no_candidates);
  }
}

TEST(NearestButton, AgreesWithBruteForceOracle) {
  std::mt19937_64 rng(2024);
  for (int round = 0; round < 50; ++round) {
    auto page = ParsedPage::from_html(random_tree(rng, 200));
    ASSERT_LE(page.document().elements().size(), 200u);
    auto widgets = detect_input_widgets(page);
    auto candidates = candidate_elements(page);
    ASSERT_FALSE(widgets.empty());
    ASSERT_FALSE(candidates.empty());
    for (const auto& w : widgets) {
      auto dist = bfs(*w.node);
      const InteractiveElement* best = nullptr;
      for (const auto& c : candidates) {
        if (!best || dist.at(c.node) < dist.at(best->node)) best = &c;
      }
      auto got = nearest_button(page, w);
      ASSERT_EQ(got.key, best->key) << "round " << round;
    }
  }
}

TEST(Truncate, CodePoints) {
  EXPECT_EQ(truncate_utf8("héllo", 2), "hé");
  EXPECT_EQ(truncate_utf8("abc", 10), "abc");
}
