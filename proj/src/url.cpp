#include "vetl/url.hpp"

#include <cctype>
#include <vector>

#include "vetl/util.hpp"

namespace vetl::url {

namespace {

bool valid_scheme(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.') return false;
  }
  return true;
}

std::string remove_dot_segments(std::string_view path) {
  std::vector<std::string> out;
  auto parts = split(path, '/');
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& seg = parts[i];
    bool last = i + 1 == parts.size();
    if (seg == ".") {
      if (last) out.emplace_back();
      continue;
    }
    if (seg == "..") {
      if (out.size() > 1) out.pop_back();
      if (last) out.emplace_back();
      continue;
    }
    out.push_back(seg);
  }
  std::string result;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i) result += '/';
    result += out[i];
  }
  if (result.empty() || result[0] != '/') result.insert(result.begin(), '/');
  return result;
}

void split_tail(std::string_view rest, Url& u) {
  auto hash = rest.find('#');
  if (hash != std::string_view::npos) {
    u.fragment = std::string(rest.substr(hash + 1));
    u.has_fragment = true;
    rest = rest.substr(0, hash);
  }
  auto q = rest.find('?');
  if (q != std::string_view::npos) {
    u.query = std::string(rest.substr(q + 1));
    u.has_query = true;
    rest = rest.substr(0, q);
  }
  u.path = std::string(rest);
}

}  // namespace

std::string Url::origin() const {
  if (opaque) return "null";
  return scheme + "://" + host + (port.empty() ? "" : ":" + port);
}

std::string Url::without_fragment() const {
  if (opaque) return scheme + ":" + path + (has_query ? "?" + query : "");
  return origin() + path + (has_query ? "?" + query : "");
}

std::string Url::str() const { return without_fragment() + (has_fragment ? "#" + fragment : ""); }

std::optional<Url> parse(std::string_view text) {
  std::string trimmed = trim(text);
  std::string_view s = trimmed;
  auto colon = s.find(':');
  if (colon == std::string_view::npos || !valid_scheme(s.substr(0, colon))) return std::nullopt;
  Url u;
  u.scheme = to_lower(s.substr(0, colon));
  auto rest = s.substr(colon + 1);
  if (rest.substr(0, 2) != "//") {
    if (u.scheme == "http" || u.scheme == "https") return std::nullopt;
    u.opaque = true;
    split_tail(rest, u);
    return u;
  }
  rest.remove_prefix(2);
  auto auth_end = rest.find_first_of("/?#");
  auto authority = rest.substr(0, auth_end);
  rest = auth_end == std::string_view::npos ? std::string_view{} : rest.substr(auth_end);
  if (auto at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);
  auto port_colon = authority.rfind(':');
  if (port_colon != std::string_view::npos && authority.find(']') == std::string_view::npos) {
    auto port = authority.substr(port_colon + 1);
    for (char c : port) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    }
    u.port = std::string(port);
    authority = authority.substr(0, port_colon);
  }
  if (authority.empty() && u.scheme != "file") return std::nullopt;
  for (char c : authority) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '<' || c == '>' || c == '"') return std::nullopt;
  }
  u.host = to_lower(authority);
  if ((u.scheme == "http" && u.port == "80") || (u.scheme == "https" && u.port == "443")) u.port.clear();
  split_tail(rest, u);
  if (u.path.empty()) u.path = "/";
  return u;
}

std::optional<Url> resolve(const Url& base, std::string_view ref_text) {
  std::string ref = trim(ref_text);
  if (auto abs = parse(ref)) return abs;
  if (base.opaque) return std::nullopt;
  Url u;
  u.scheme = base.scheme;
  if (ref.rfind("//", 0) == 0) return parse(base.scheme + ":" + ref);
  u.host = base.host;
  u.port = base.port;
  if (ref.empty()) {
    u.path = base.path;
    u.query = base.query;
    u.has_query = base.has_query;
    return u;
  }
  if (ref[0] == '#') {
    u.path = base.path;
    u.query = base.query;
    u.has_query = base.has_query;
    u.fragment = ref.substr(1);
    u.has_fragment = true;
    return u;
  }
  Url tail;
  split_tail(ref, tail);
  u.query = tail.query;
  u.has_query = tail.has_query;
  u.fragment = tail.fragment;
  u.has_fragment = tail.has_fragment;
  if (tail.path.empty()) {
    u.path = base.path;
    if (!tail.has_query) {
      u.query = base.query;
      u.has_query = base.has_query;
    }
  } else if (tail.path[0] == '/') {
    u.path = remove_dot_segments(tail.path);
  } else {
    auto dir = base.path.substr(0, base.path.rfind('/') + 1);
    u.path = remove_dot_segments(dir + tail.path);
  }
  return u;
}

std::string normalize(std::string_view raw) {
  auto u = parse(raw);
  if (!u) return trim(raw);
  if (u->opaque) return u->without_fragment();
  if (u->path.size() > 1 && u->path.back() == '/') u->path.pop_back();
  return u->without_fragment();
}

std::string percent_encode_form(std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c == '*' || c == '-' || c == '.' || c == '_') {
      out.push_back(ch);
    } else if (c == ' ') {
      out.push_back('+');
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

std::string percent_decode(std::string_view text, bool plus_as_space) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '+' && plus_as_space) {
      out.push_back(' ');
    } else if (c == '%' && i + 2 < text.size() && std::isxdigit(static_cast<unsigned char>(text[i + 1])) &&
               std::isxdigit(static_cast<unsigned char>(text[i + 2]))) {
      out.push_back(static_cast<char>(std::stoi(std::string(text.substr(i + 1, 2)), nullptr, 16)));
      i += 2;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace vetl::url
