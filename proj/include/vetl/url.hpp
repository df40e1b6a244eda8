#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace vetl::url {

struct Url {
  std::string scheme;  // lower-case, without ':'
  std::string host;    // lower-case
  std::string port;    // empty when absent
  std::string path;    // begins with '/' for hierarchical URLs
  std::string query;   // without '?'; nullopt-like empty + has_query flag
  std::string fragment;
  bool has_query = false;
  bool has_fragment = false;
  bool opaque = false;  // about:, data:, javascript: and friends

  std::string origin() const;
  std::string str() const;
  std::string without_fragment() const;
};

/// Parses an absolute URL. Returns nullopt when there is no scheme or the
/// authority is malformed.
std::optional<Url> parse(std::string_view text);

/// Resolves `ref` against an absolute base URL.
std::optional<Url> resolve(const Url& base, std::string_view ref);

/// Lower-cases scheme and host, strips the fragment, keeps path and query, and
/// drops a trailing slash on non-root paths.
std::string normalize(std::string_view raw);

std::string percent_encode_form(std::string_view text);
std::string percent_decode(std::string_view text, bool plus_as_space = true);

}  // namespace vetl::url
