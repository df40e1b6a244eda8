#include <gtest/gtest.h>

#include "vetl/util.hpp"

using namespace vetl;

TEST(Util, TrimAndCollapse) {
  EXPECT_EQ(trim("  a b \n"), "a b");
  EXPECT_EQ(collapse_whitespace(" a \t\n b  c "), "a b c");
  EXPECT_EQ(to_lower("MiXeD"), "mixed");
}

TEST(Util, CaseInsensitiveSearch) {
  EXPECT_EQ(ifind("Hello World", "WORLD"), 6u);
  EXPECT_EQ(irfind("ab AB ab", "ab"), 6u);
  EXPECT_EQ(ifind("abc", "x"), std::string::npos);
  EXPECT_TRUE(iequals("ABC", "abc"));
  EXPECT_TRUE(starts_with_icase("JavaScript:void", "javascript:"));
}

TEST(Util, Split) {
  EXPECT_EQ(split("a,b,,c", ','), (std::vector<std::string>{"a", "b", "", "c"}));
}

TEST(Util, ReplaceAll) { EXPECT_EQ(replace_all("{x} and {x}", "{x}", "y"), "y and y"); }

TEST(Util, Base64RoundTrip) {
  std::vector<std::uint8_t> bytes{0, 1, 2, 250, 255, 10};
  EXPECT_EQ(base64_decode(base64_encode(bytes)), bytes);
  std::string_view s = "Man";
  EXPECT_EQ(base64_encode(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size())), "TWFu");
}

TEST(Util, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex(std::string_view("abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Util, Utf8Validation) {
  EXPECT_TRUE(is_valid_utf8("héllo"));
  EXPECT_FALSE(is_valid_utf8("\xff\xfe"));
}
