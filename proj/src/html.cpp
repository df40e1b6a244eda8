#include "vetl/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <unordered_map>

#include "vetl/util.hpp"

namespace vetl::html {

namespace {

constexpr std::array kVoidElements = {"area", "base", "br",   "col",   "embed",  "hr",    "img",
                                      "input", "link", "meta", "param", "source", "track", "wbr"};

// Start tags that implicitly close an open <p>.
constexpr std::array kClosesParagraph = {
    "address", "article", "aside", "blockquote", "details", "div", "dl", "fieldset", "figure", "footer",
    "form",    "h1",      "h2",    "h3",         "h4",      "h5",  "h6", "header",   "hr",     "main",
    "nav",     "ol",      "p",     "pre",        "section", "table", "ul", "li"};

template <std::size_t N>
bool contains(const std::array<const char*, N>& set, std::string_view tag) {
  return std::any_of(set.begin(), set.end(), [&](const char* s) { return tag == s; });
}

bool is_raw_text(std::string_view tag) { return tag == "script" || tag == "style"; }
bool is_escapable_raw_text(std::string_view tag) { return tag == "title" || tag == "textarea"; }

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

const std::unordered_map<std::string_view, std::uint32_t>& named_entities() {
  static const std::unordered_map<std::string_view, std::uint32_t> table = {
      {"amp", '&'},     {"lt", '<'},       {"gt", '>'},      {"quot", '"'},    {"apos", '\''},
      {"nbsp", 0xA0},   {"copy", 0xA9},    {"reg", 0xAE},    {"hellip", 0x2026}, {"mdash", 0x2014},
      {"ndash", 0x2013}, {"laquo", 0xAB},  {"raquo", 0xBB},  {"euro", 0x20AC}, {"times", 0xD7},
      {"middot", 0xB7}, {"trade", 0x2122}, {"larr", 0x2190}, {"rarr", 0x2192}};
  return table;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }
bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == ':' || c == '_' || c == '.';
}

class TreeBuilder {
 public:
  explicit TreeBuilder(Node& root) { stack_.push_back(&root); }

  void text(std::string_view decoded) {
    if (decoded.empty()) return;
    Node* cur = stack_.back();
    if (!cur->children().empty() && cur->children().back()->is_text()) {
      cur->children().back()->data() += decoded;
      return;
    }
    auto node = std::make_unique<Node>(NodeType::text);
    node->data() = std::string(decoded);
    cur->append(std::move(node));
  }

  void comment(std::string_view body, NodeType type) {
    auto node = std::make_unique<Node>(type);
    node->data() = std::string(body);
    stack_.back()->append(std::move(node));
  }

  // Returns the inserted element; caller checks whether it stays open.
  Node* start_tag(const std::string& tag, std::vector<Attribute> attrs, bool self_closing) {
    if ((tag == "html" || tag == "body" || tag == "head") && open_index(tag) >= 0) {
      Node* existing = stack_[static_cast<std::size_t>(open_index(tag))];
      for (auto& a : attrs) {
        if (!existing->has_attr(a.name)) existing->set_attr(a.name, std::move(a.value));
      }
      return nullptr;
    }
    apply_implicit_closes(tag);
    auto node = std::make_unique<Node>(NodeType::element, tag);
    for (auto& a : attrs) {
      if (!node->has_attr(a.name)) node->set_attr(a.name, std::move(a.value));
    }
    Node* inserted = stack_.back()->append(std::move(node));
    if (!self_closing && !is_void_element(tag)) stack_.push_back(inserted);
    return inserted;
  }

  void end_tag(const std::string& tag) {
    int idx = open_index(tag);
    if (idx <= 0) return;  // never pop the document node
    stack_.resize(static_cast<std::size_t>(idx));
  }

 private:
  int open_index(std::string_view tag) const {
    for (std::size_t i = stack_.size(); i-- > 1;) {
      if (stack_[i]->tag() == tag) return static_cast<int>(i);
    }
    return -1;
  }

  // Closes `tag` if open below the nearest of `boundaries`.
  void close_within(std::string_view tag, std::initializer_list<std::string_view> boundaries) {
    for (std::size_t i = stack_.size(); i-- > 1;) {
      const auto& t = stack_[i]->tag();
      if (t == tag) {
        stack_.resize(i);
        return;
      }
      if (std::find(boundaries.begin(), boundaries.end(), t) != boundaries.end()) return;
    }
  }

  void apply_implicit_closes(std::string_view tag) {
    if (contains(kClosesParagraph, tag)) close_within("p", {"button", "td", "th", "li", "div", "form", "body"});
    if (tag == "li") close_within("li", {"ul", "ol"});
    if (tag == "dt" || tag == "dd") {
      close_within("dt", {"dl"});
      close_within("dd", {"dl"});
    }
    if (tag == "option") close_within("option", {"select", "datalist"});
    if (tag == "optgroup") {
      close_within("option", {"select"});
      close_within("optgroup", {"select"});
    }
    if (tag == "tr") {
      close_within("td", {"table"});
      close_within("th", {"table"});
      close_within("tr", {"table"});
    }
    if (tag == "td" || tag == "th") {
      close_within("td", {"tr", "table"});
      close_within("th", {"tr", "table"});
    }
  }

  std::vector<Node*> stack_;
};

class Tokenizer {
 public:
  Tokenizer(std::string_view src, TreeBuilder& builder) : src_(src), builder_(builder) {}

  void run() {
    std::size_t text_start = 0;
    while (pos_ < src_.size()) {
      if (src_[pos_] != '<') {
        ++pos_;
        continue;
      }
      std::size_t lt = pos_;
      if (!markup_follows()) {
        ++pos_;
        continue;
      }
      builder_.text(decode_entities(src_.substr(text_start, lt - text_start)));
      consume_markup();
      text_start = pos_;
    }
    builder_.text(decode_entities(src_.substr(text_start)));
  }

 private:
  bool markup_follows() const {
    if (pos_ + 1 >= src_.size()) return false;
    char c = src_[pos_ + 1];
    if (c == '!' || c == '?') return true;
    if (c == '/') return pos_ + 2 < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_ + 2]));
    return std::isalpha(static_cast<unsigned char>(c));
  }

  void consume_markup() {
    if (src_.compare(pos_, 4, "<!--") == 0) {
      auto end = src_.find("-->", pos_ + 4);
      std::size_t stop = end == std::string_view::npos ? src_.size() : end;
      builder_.comment(src_.substr(pos_ + 4, stop - pos_ - 4), NodeType::comment);
      pos_ = end == std::string_view::npos ? src_.size() : end + 3;
      return;
    }
    if (src_[pos_ + 1] == '!' || src_[pos_ + 1] == '?') {
      auto end = src_.find('>', pos_);
      std::size_t stop = end == std::string_view::npos ? src_.size() : end;
      std::string body(src_.substr(pos_ + 2, stop - pos_ - 2));
      builder_.comment(body, starts_with_icase(body, "doctype") ? NodeType::doctype : NodeType::comment);
      pos_ = end == std::string_view::npos ? src_.size() : end + 1;
      return;
    }
    if (src_[pos_ + 1] == '/') {
      pos_ += 2;
      std::string name = to_lower(read_name());
      auto end = src_.find('>', pos_);
      pos_ = end == std::string_view::npos ? src_.size() : end + 1;
      builder_.end_tag(name);
      return;
    }
    ++pos_;
    std::string name = to_lower(read_name());
    std::vector<Attribute> attrs;
    bool self_closing = false;
    while (pos_ < src_.size()) {
      skip_space();
      if (pos_ >= src_.size()) break;
      char c = src_[pos_];
      if (c == '>') {
        ++pos_;
        break;
      }
      if (c == '/') {
        ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '>') {
          self_closing = true;
          ++pos_;
          break;
        }
        continue;
      }
      std::size_t start = pos_;
      while (pos_ < src_.size() && !is_space(src_[pos_]) && src_[pos_] != '=' && src_[pos_] != '>' &&
             !(src_[pos_] == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>')) {
        ++pos_;
      }
      if (pos_ == start) {
        ++pos_;  // stray character such as a lone quote
        continue;
      }
      Attribute attr{to_lower(src_.substr(start, pos_ - start)), {}};
      skip_space();
      if (pos_ < src_.size() && src_[pos_] == '=') {
        ++pos_;
        skip_space();
        attr.value = decode_entities(read_attribute_value());
      }
      attrs.push_back(std::move(attr));
    }
    Node* element = builder_.start_tag(name, std::move(attrs), self_closing);
    if (element && !self_closing && (is_raw_text(name) || is_escapable_raw_text(name))) {
      consume_raw_text(name);
    }
  }

  void consume_raw_text(const std::string& tag) {
    std::string closing = "</" + tag;
    std::size_t end = ifind(src_, closing, pos_);
    std::size_t stop = end == std::string_view::npos ? src_.size() : end;
    auto body = src_.substr(pos_, stop - pos_);
    if (is_raw_text(tag)) {
      builder_.text(body);
    } else {
      // textarea drops a single leading newline
      if (tag == "textarea" && !body.empty() && body.front() == '\n') body.remove_prefix(1);
      builder_.text(decode_entities(body));
    }
    pos_ = stop;
    if (end != std::string_view::npos) {
      auto gt = src_.find('>', end);
      pos_ = gt == std::string_view::npos ? src_.size() : gt + 1;
    }
    builder_.end_tag(tag);
  }

  std::string_view read_name() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && is_name_char(src_[pos_])) ++pos_;
    return src_.substr(start, pos_ - start);
  }

  std::string_view read_attribute_value() {
    if (pos_ >= src_.size()) return {};
    char q = src_[pos_];
    if (q == '"' || q == '\'') {
      auto end = src_.find(q, pos_ + 1);
      std::size_t stop = end == std::string_view::npos ? src_.size() : end;
      auto value = src_.substr(pos_ + 1, stop - pos_ - 1);
      pos_ = end == std::string_view::npos ? src_.size() : end + 1;
      return value;
    }
    std::size_t start = pos_;
    while (pos_ < src_.size() && !is_space(src_[pos_]) && src_[pos_] != '>') ++pos_;
    return src_.substr(start, pos_ - start);
  }

  void skip_space() {
    while (pos_ < src_.size() && is_space(src_[pos_])) ++pos_;
  }

  std::string_view src_;
  TreeBuilder& builder_;
  std::size_t pos_ = 0;
};

void serialize_into(const Node& node, std::string& out) {
  switch (node.type()) {
    case NodeType::document:
      for (const auto& c : node.children()) serialize_into(*c, out);
      return;
    case NodeType::text: {
      const Node* p = node.parent();
      if (p && is_raw_text(p->tag())) {
        out += node.data();
      } else {
        out += escape_text(node.data());
      }
      return;
    }
    case NodeType::comment:
      out += "<!--" + node.data() + "-->";
      return;
    case NodeType::doctype:
      out += "<!" + node.data() + ">";
      return;
    case NodeType::element:
      break;
  }
  out += '<';
  out += node.tag();
  for (const auto& a : node.attributes()) {
    out += ' ';
    out += a.name;
    out += "=\"";
    out += escape_attribute(a.value);
    out += '"';
  }
  out += '>';
  if (is_void_element(node.tag())) return;
  for (const auto& c : node.children()) serialize_into(*c, out);
  out += "</" + node.tag() + ">";
}

void text_content_into(const Node& node, std::string& out) {
  for (const auto& c : node.children()) {
    if (c->is_text()) {
      out += c->data();
      out += ' ';
    } else if (c->is_element() && c->tag() != "script" && c->tag() != "style" && c->tag() != "template") {
      text_content_into(*c, out);
      out += ' ';
    }
  }
}

}  // namespace

// Node

const std::string* Node::attr(std::string_view name) const {
  for (const auto& a : attributes_) {
    if (a.name == name) return &a.value;
  }
  return nullptr;
}

void Node::set_attr(std::string_view name, std::string value) {
  for (auto& a : attributes_) {
    if (a.name == name) {
      a.value = std::move(value);
      return;
    }
  }
  attributes_.push_back({std::string(name), std::move(value)});
}

void Node::remove_attr(std::string_view name) {
  std::erase_if(attributes_, [&](const Attribute& a) { return a.name == name; });
}

Node* Node::append(std::unique_ptr<Node> child) {
  child->parent_ = this;
  children_.push_back(std::move(child));
  return children_.back().get();
}

int Node::element_index() const {
  if (!parent_) return 0;
  int i = 0;
  for (const auto& c : parent_->children_) {
    if (c.get() == this) return i;
    if (c->is_element()) ++i;
  }
  return i;
}

int Node::same_tag_index() const {
  if (!parent_) return 0;
  int i = 0;
  for (const auto& c : parent_->children_) {
    if (c.get() == this) return i;
    if (c->is_element() && c->tag() == name_) ++i;
  }
  return i;
}

std::vector<const Node*> Node::element_children() const {
  std::vector<const Node*> out;
  for (const auto& c : children_) {
    if (c->is_element()) out.push_back(c.get());
  }
  return out;
}

// Document

Document::Document() : root_(std::make_unique<Node>(NodeType::document)) {}

Document Document::parse(std::string_view html) {
  if (!is_valid_utf8(html)) throw ParseError("document is not valid UTF-8");
  Document doc;
  TreeBuilder builder(*doc.root_);
  Tokenizer tokenizer(html, builder);
  tokenizer.run();
  doc.reindex();
  return doc;
}

void Document::reindex() {
  elements_.clear();
  std::vector<Node*> stack{root_.get()};
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    if (n->is_element()) {
      n->order_ = static_cast<int>(elements_.size());
      elements_.push_back(n);
    }
    for (auto it = n->children_.rbegin(); it != n->children_.rend(); ++it) stack.push_back(it->get());
  }
}

const Node* Document::first_element(std::string_view tag) const {
  for (const Node* n : elements_) {
    if (n->tag() == tag) return n;
  }
  return nullptr;
}

const Node* Document::find_if(const std::function<bool(const Node&)>& pred) const {
  for (const Node* n : elements_) {
    if (pred(*n)) return n;
  }
  return nullptr;
}

std::string Document::title() const {
  const Node* t = first_element("title");
  return t ? text_content(*t) : std::string{};
}

// Free functions

bool is_void_element(std::string_view tag) { return contains(kVoidElements, tag); }

std::string decode_entities(std::string_view text) {
  if (text.find('&') == std::string_view::npos) return std::string(text);
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '&') {
      out.push_back(text[i++]);
      continue;
    }
    auto semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back(text[i++]);
      continue;
    }
    auto body = text.substr(i + 1, semi - i - 1);
    bool ok = false;
    if (!body.empty() && body[0] == '#') {
      std::uint32_t cp = 0;
      bool hex = body.size() > 1 && (body[1] == 'x' || body[1] == 'X');
      auto digits = body.substr(hex ? 2 : 1);
      ok = !digits.empty();
      for (char c : digits) {
        int v = std::isdigit(static_cast<unsigned char>(c)) ? c - '0'
                : hex && std::isxdigit(static_cast<unsigned char>(c))
                    ? std::tolower(static_cast<unsigned char>(c)) - 'a' + 10
                    : -1;
        if (v < 0 || cp > 0x10FFFF) {
          ok = false;
          break;
        }
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
      }
      if (ok) append_utf8(out, cp);
    } else {
      auto it = named_entities().find(body);
      if (it != named_entities().end()) {
        append_utf8(out, it->second);
        ok = true;
      }
    }
    if (ok) {
      i = semi + 1;
    } else {
      out.push_back(text[i++]);
    }
  }
  return out;
}

std::string escape_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string escape_attribute(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string serialize(const Node& node) {
  std::string out;
  serialize_into(node, out);
  return out;
}

std::string own_text(const Node& node) {
  if (node.tag() == "script" || node.tag() == "style") return {};
  std::string raw;
  for (const auto& c : node.children()) {
    if (c->is_text()) {
      raw += c->data();
      raw += ' ';
    }
  }
  return collapse_whitespace(raw);
}

std::string text_content(const Node& node) {
  std::string raw;
  text_content_into(node, raw);
  return collapse_whitespace(raw);
}

int depth(const Node& node) {
  int d = 0;
  for (const Node* p = node.parent(); p; p = p->parent()) ++d;
  return d;
}

}  // namespace vetl::html
