#include <gtest/gtest.h>

#include "vetl/url.hpp"

using namespace vetl;

TEST(Url, NormalizeExamples) {
  EXPECT_EQ(url::normalize("https://X.test/a/#sec"), "https://x.test/a");
  EXPECT_NE(url::normalize("https://x.test/a?q=1"), url::normalize("https://x.test/a?q=2"));
  EXPECT_EQ(url::normalize("https://x.test/"), "https://x.test/");
  EXPECT_EQ(url::normalize("HTTP://Host.Test:8080/Path/"), "http://host.test:8080/Path");
}

TEST(Url, ParseAndOrigin) {
  auto u = url::parse("http://127.0.0.1:8000/flow/index.html?x=1#top");
  ASSERT_TRUE(u);
  EXPECT_EQ(u->origin(), "http://127.0.0.1:8000");
  EXPECT_EQ(u->path, "/flow/index.html");
  EXPECT_EQ(u->query, "x=1");
  EXPECT_EQ(u->without_fragment(), "http://127.0.0.1:8000/flow/index.html?x=1");
  EXPECT_FALSE(url::parse("no scheme here"));
}

TEST(Url, Resolve) {
  auto base = *url::parse("http://h/a/b/c.html");
  EXPECT_EQ(url::resolve(base, "d.html")->str(), "http://h/a/b/d.html");
  EXPECT_EQ(url::resolve(base, "../x.html")->str(), "http://h/a/x.html");
  EXPECT_EQ(url::resolve(base, "/root.html")->str(), "http://h/root.html");
  EXPECT_EQ(url::resolve(base, "?q=1")->str(), "http://h/a/b/c.html?q=1");
  EXPECT_EQ(url::resolve(base, "http://o/p")->str(), "http://o/p");
}

TEST(Url, FormEncoding) {
  EXPECT_EQ(url::percent_encode_form("a b&c"), "a+b%26c");
  EXPECT_EQ(url::percent_decode("a+b%26c"), "a b&c");
}
