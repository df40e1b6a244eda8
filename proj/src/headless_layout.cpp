#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

#include "vetl/headless.hpp"
#include "vetl/util.hpp"

namespace vetl::headless {

namespace {

constexpr double kBodyMargin = 8;
constexpr double kLineHeight = 20;
constexpr double kCharWidth = 8;
constexpr double kWordGap = 8;
constexpr double kControlHeight = 28;

constexpr std::array kNeverRendered = {"head", "script", "style", "title", "meta", "link", "template", "base", "noscript"};
constexpr std::array kBlockTags = {"html",   "body",    "div",    "form",   "p",     "h1",     "h2",  "h3",
                                   "h4",     "h5",      "h6",     "ul",     "ol",    "li",     "table", "tbody",
                                   "thead",  "tfoot",   "tr",     "section", "header", "footer", "nav", "main",
                                   "article", "aside",  "fieldset", "legend", "dl",   "dt",     "dd",  "pre",
                                   "blockquote", "figure", "figcaption", "address", "details", "summary", "caption"};

template <std::size_t N>
bool in(const std::array<const char*, N>& set, std::string_view tag) {
  return std::any_of(set.begin(), set.end(), [&](const char* s) { return tag == s; });
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

bool style_hides(const html::Node& n) {
  const std::string* style = n.attr("style");
  if (!style) return false;
  std::string compact;
  for (char c : to_lower(*style)) {
    if (c != ' ' && c != '\t' && c != '\n') compact.push_back(c);
  }
  return compact.find("display:none") != std::string::npos || compact.find("visibility:hidden") != std::string::npos;
}

bool self_hidden(const html::Node& n) {
  if (in(kNeverRendered, n.tag())) return true;
  if (n.has_attr("hidden")) return true;
  if (n.tag() == "input" && to_lower(n.attr("type") ? *n.attr("type") : "") == "hidden") return true;
  return style_hides(n);
}

struct Heading {
  double char_width;
  double line_height;
};

Heading font_for(const html::Node* block) {
  if (!block) return {kCharWidth, kLineHeight};
  if (block->tag() == "h1") return {14, 36};
  if (block->tag() == "h2") return {12, 30};
  if (block->tag() == "h3") return {10, 24};
  return {kCharWidth, kLineHeight};
}

class LayoutEngine {
 public:
  explicit LayoutEngine(int viewport_width) : viewport_width_(viewport_width) {}

  Layout run(const html::Document& doc) {
    left_ = kBodyMargin;
    right_ = std::max(kBodyMargin + 1, viewport_width_ - kBodyMargin);
    x_ = left_;
    y_ = kBodyMargin;
    for (const auto& child : doc.root().children()) visit(*child);
    newline();
    layout_.content_height = y_ + kBodyMargin;
    return std::move(layout_);
  }

 private:
  void newline(bool force = false) {
    if (x_ > left_ || force) {
      y_ += line_height_;
    }
    x_ = left_;
    line_height_ = kLineHeight;
  }

  Rect place(double w, double h) {
    if (x_ > left_ && x_ + w > right_) newline();
    Rect r{x_, y_, w, h};
    x_ += w + kWordGap;
    line_height_ = std::max(line_height_, h);
    extend(r);
    return r;
  }

  // Grows the rectangles of the inline ancestors currently being laid out.
  void extend(const Rect& r) {
    for (auto& [node, acc] : inline_stack_) {
      if (!acc.has_value()) {
        acc = r;
      } else {
        double x0 = std::min(acc->x, r.x), y0 = std::min(acc->y, r.y);
        double x1 = std::max(acc->right(), r.right()), y1 = std::max(acc->bottom(), r.bottom());
        acc = Rect{x0, y0, x1 - x0, y1 - y0};
      }
    }
  }

  void mark_hidden(const html::Node& n) {
    if (n.is_element()) layout_.boxes[&n] = Box{Rect{x_, y_, 0, 0}, false};
    for (const auto& c : n.children()) mark_hidden(*c);
  }

  void mark_inside(const html::Node& n, const Rect& r) {
    for (const auto& c : n.children()) {
      if (c->is_element()) {
        if (self_hidden(*c)) {
          mark_hidden(*c);
          continue;
        }
        layout_.boxes[c.get()] = Box{r, true};
      }
      mark_inside(*c, r);
    }
  }

  void text(const html::Node& n) {
    const html::Node* owner = n.parent();
    bool in_link = false;
    const html::Node* heading = nullptr;
    for (const html::Node* p = owner; p; p = p->parent()) {
      if (p->is_element("a") && p->has_attr("href")) in_link = true;
      if (!heading && p->is_element() && p->tag().size() == 2 && p->tag()[0] == 'h' && std::isdigit(p->tag()[1])) {
        heading = p;
      }
    }
    Heading font = font_for(heading);
    for (const auto& word : split(collapse_whitespace(n.data()), ' ')) {
      if (word.empty()) continue;
      Rect r = place(font.char_width * static_cast<double>(utf8_length(word)), font.line_height);
      PaintKind kind = in_link ? PaintKind::link_text : heading ? PaintKind::heading_text : PaintKind::text;
      layout_.paints.push_back({kind, r, owner});
    }
  }

  void atomic(const html::Node& n) {
    const std::string& tag = n.tag();
    double w = 0, h = kControlHeight;
    PaintKind kind = PaintKind::button;
    if (tag == "input") {
      std::string type = to_lower(n.attr("type") ? *n.attr("type") : "text");
      if (type == "checkbox" || type == "radio") {
        w = 16;
        h = 16;
        kind = PaintKind::checkbox;
      } else if (type == "submit" || type == "button" || type == "reset" || type == "image") {
        std::string label = n.attr("value") ? *n.attr("value") : type == "reset" ? "Reset" : "Submit";
        w = kCharWidth * static_cast<double>(utf8_length(label)) + 24;
        kind = PaintKind::button;
      } else {
        w = 200;
        kind = PaintKind::text_input;
      }
    } else if (tag == "textarea") {
      int cols = n.attr("cols") ? std::max(1, std::atoi(n.attr("cols")->c_str())) : 36;
      int rows = n.attr("rows") ? std::max(1, std::atoi(n.attr("rows")->c_str())) : 3;
      w = cols * kCharWidth + 12;
      h = rows * kLineHeight + 8;
      kind = PaintKind::textarea;
    } else if (tag == "select") {
      w = 160;
      kind = PaintKind::text_input;
    } else if (tag == "img") {
      w = n.attr("width") ? std::max(1, std::atoi(n.attr("width")->c_str())) : 32;
      h = n.attr("height") ? std::max(1, std::atoi(n.attr("height")->c_str())) : 32;
      kind = PaintKind::image;
    } else {  // button
      w = kCharWidth * static_cast<double>(utf8_length(text_content(n))) + 24;
      kind = PaintKind::button;
    }
    w = std::min(w, right_ - left_);
    Rect r = place(w, h);
    layout_.boxes[&n] = Box{r, true};
    layout_.paints.push_back({kind, r, &n});
    mark_inside(n, r);
  }

  void visit(const html::Node& n) {
    if (n.is_text()) {
      text(n);
      return;
    }
    if (!n.is_element()) return;
    if (self_hidden(n)) {
      mark_hidden(n);
      return;
    }
    const std::string& tag = n.tag();
    if (tag == "br") {
      layout_.boxes[&n] = Box{Rect{x_, y_, 0, line_height_}, true};
      newline(true);
      return;
    }
    if (tag == "hr") {
      newline();
      Rect r{left_, y_ + 4, right_ - left_, 2};
      layout_.boxes[&n] = Box{r, true};
      layout_.paints.push_back({PaintKind::rule, r, &n});
      y_ += 10;
      return;
    }
    if (tag == "input" || tag == "button" || tag == "textarea" || tag == "select" || tag == "img") {
      atomic(n);
      return;
    }
    if (in(kBlockTags, tag)) {
      block(n);
      return;
    }
    inline_stack_.emplace_back(&n, std::nullopt);
    for (const auto& c : n.children()) visit(*c);
    auto acc = inline_stack_.back().second;
    inline_stack_.pop_back();
    Rect r = acc.value_or(Rect{x_, y_, 0, line_height_});
    layout_.boxes[&n] = Box{r, true};
  }

  void block(const html::Node& n) {
    newline();
    double indent = (n.tag() == "ul" || n.tag() == "ol" || n.tag() == "blockquote") ? 24 : 0;
    double saved_left = left_;
    left_ += indent;
    x_ = left_;
    double top = y_;
    auto saved_inline = std::move(inline_stack_);
    inline_stack_.clear();
    for (const auto& c : n.children()) visit(*c);
    newline();
    inline_stack_ = std::move(saved_inline);
    left_ = saved_left;
    x_ = left_;
    bool spaced = n.tag() == "p" || n.tag() == "form" || n.tag() == "ul" || n.tag() == "ol" ||
                  (n.tag().size() == 2 && n.tag()[0] == 'h' && std::isdigit(n.tag()[1]));
    double bottom = y_;
    Rect r{saved_left, top, right_ - saved_left, bottom - top};
    if (n.tag() == "html") r = Rect{0, 0, static_cast<double>(viewport_width_), bottom + kBodyMargin};
    layout_.boxes[&n] = Box{r, true};
    if (spaced) y_ += 8;
    extend(r);
  }

  int viewport_width_;
  double left_ = 0, right_ = 0, x_ = 0, y_ = 0;
  double line_height_ = kLineHeight;
  std::vector<std::pair<const html::Node*, std::optional<Rect>>> inline_stack_;
  Layout layout_;
};

struct Canvas {
  Image& image;
  double dpr;
  double scroll_y;

  PixelRect to_device(const Rect& r) const {
    int x0 = static_cast<int>(std::floor(r.x * dpr));
    int y0 = static_cast<int>(std::floor((r.y - scroll_y) * dpr));
    int x1 = static_cast<int>(std::ceil(r.right() * dpr));
    int y1 = static_cast<int>(std::ceil((r.bottom() - scroll_y) * dpr));
    return {x0, y0, x1 - x0, y1 - y0};
  }

  void fill(const Rect& r, Color c) { image.fill_rect(to_device(r), c); }

  void border(const Rect& r, Color c) {
    PixelRect p = to_device(r);
    int t = std::max(1, static_cast<int>(dpr));
    image.fill_rect({p.x, p.y, p.width, t}, c);
    image.fill_rect({p.x, p.bottom() - t, p.width, t}, c);
    image.fill_rect({p.x, p.y, t, p.height}, c);
    image.fill_rect({p.right() - t, p.y, t, p.height}, c);
  }
};

constexpr Color kInk{60, 60, 60, 255};
constexpr Color kHeadingInk{20, 20, 20, 255};
constexpr Color kLinkInk{26, 13, 171, 255};
constexpr Color kControlBorder{118, 118, 118, 255};
constexpr Color kButtonFace{233, 233, 237, 255};
constexpr Color kPlaceholderInk{170, 170, 170, 255};
constexpr Color kImageFill{200, 200, 200, 255};

}  // namespace

bool is_text_input_type(std::string_view type) {
  static constexpr std::array kTextual = {"text", "password", "email", "number", "search", "tel", "url"};
  return std::any_of(kTextual.begin(), kTextual.end(), [&](const char* t) { return type == t; });
}

std::string ControlState::value_of(const html::Node& n) const {
  auto it = values.find(&n);
  if (it != values.end()) return it->second;
  if (n.tag() == "textarea") {
    std::string raw;
    for (const auto& c : n.children()) {
      if (c->is_text()) raw += c->data();
    }
    return raw;
  }
  if (n.tag() == "select") {
    const html::Node* first = nullptr;
    std::vector<const html::Node*> stack{&n};
    while (!stack.empty()) {
      const html::Node* cur = stack.back();
      stack.pop_back();
      for (auto it2 = cur->children().rbegin(); it2 != cur->children().rend(); ++it2) stack.push_back(it2->get());
      if (cur->is_element("option")) {
        if (!first) first = cur;
        if (cur->has_attr("selected")) {
          first = cur;
          break;
        }
      }
    }
    if (!first) return {};
    return first->attr("value") ? *first->attr("value") : text_content(*first);
  }
  const std::string* v = n.attr("value");
  return v ? *v : std::string{};
}

bool ControlState::is_checked(const html::Node& n) const {
  auto it = checked.find(&n);
  if (it != checked.end()) return it->second;
  return n.has_attr("checked");
}

Layout layout_document(const html::Document& doc, int viewport_width) {
  return LayoutEngine(viewport_width).run(doc);
}

Image render_viewport(const Layout& layout, const ControlState& state, int viewport_width, int viewport_height,
                      double scroll_y, double dpr) {
  Image image(static_cast<int>(std::lround(viewport_width * dpr)), static_cast<int>(std::lround(viewport_height * dpr)));
  Canvas canvas{image, dpr, scroll_y};
  for (const Paint& p : layout.paints) {
    if (p.rect.bottom() < scroll_y || p.rect.y > scroll_y + viewport_height) continue;
    const Rect& r = p.rect;
    switch (p.kind) {
      case PaintKind::text:
        canvas.fill({r.x, r.y + 5, r.width, 10}, kInk);
        break;
      case PaintKind::link_text:
        canvas.fill({r.x, r.y + 5, r.width, 10}, kLinkInk);
        canvas.fill({r.x, r.y + 16, r.width, 1}, kLinkInk);
        break;
      case PaintKind::heading_text:
        canvas.fill({r.x, r.y + r.height * 0.2, r.width, r.height * 0.55}, kHeadingInk);
        break;
      case PaintKind::text_input:
      case PaintKind::textarea: {
        canvas.border(r, kControlBorder);
        std::string value = p.node ? state.value_of(*p.node) : std::string{};
        const std::string* placeholder = p.node ? p.node->attr("placeholder") : nullptr;
        std::size_t len = !value.empty() ? value.size() : placeholder ? placeholder->size() : 0;
        if (len > 0) {
          double w = std::min(r.width - 12, kCharWidth * static_cast<double>(len));
          canvas.fill({r.x + 6, r.y + 9, w, 10}, value.empty() ? kPlaceholderInk : kInk);
        }
        break;
      }
      case PaintKind::button:
        canvas.fill(r, kButtonFace);
        canvas.border(r, kControlBorder);
        canvas.fill({r.x + 12, r.y + 9, std::max(0.0, r.width - 24), 10}, kHeadingInk);
        break;
      case PaintKind::checkbox:
        canvas.border(r, kControlBorder);
        if (p.node && state.is_checked(*p.node)) canvas.fill({r.x + 4, r.y + 4, 8, 8}, kHeadingInk);
        break;
      case PaintKind::image:
        canvas.fill(r, kImageFill);
        break;
      case PaintKind::rule:
        canvas.fill(r, kControlBorder);
        break;
    }
  }
  return image;
}

}  // namespace vetl::headless
