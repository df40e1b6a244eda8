#include "vetl/dom_context.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <set>
#include <unordered_set>

#include "vetl/headless.hpp"
#include "vetl/util.hpp"

namespace vetl::dom {

namespace {

constexpr std::array kUnrendered = {"head", "title", "script", "style", "template", "noscript", "meta", "link", "base"};

bool unrendered_tag(std::string_view tag) {
  return std::any_of(kUnrendered.begin(), kUnrendered.end(), [&](const char* t) { return tag == t; });
}

std::string attr_or(const html::Node& n, std::string_view name, std::string fallback = {}) {
  const std::string* v = n.attr(name);
  return v ? *v : fallback;
}

bool statically_hidden(const html::Node& n) {
  for (const html::Node* p = &n; p && p->is_element(); p = p->parent()) {
    if (unrendered_tag(p->tag()) || p->has_attr("hidden")) return true;
    if (p->is_element("input") && iequals(trim(attr_or(*p, "type")), "hidden")) return true;
    std::string style;
    for (char c : to_lower(attr_or(*p, "style"))) {
      if (c != ' ' && c != '\t' && c != '\n') style.push_back(c);
    }
    if (style.find("display:none") != std::string::npos || style.find("visibility:hidden") != std::string::npos) {
      return true;
    }
  }
  return false;
}

std::string normalized_type(const html::Node& input) {
  std::string type = to_lower(trim(attr_or(input, "type")));
  return type.empty() ? "text" : type;
}

// Types that the browser renders as something other than a free-text box.
constexpr std::array kNonTextualTypes = {"checkbox", "radio", "file",  "color",  "range",          "date",
                                         "time",     "month", "week",  "hidden", "datetime-local", "datetime",
                                         "submit",   "button", "reset", "image"};

bool is_widget_type(std::string_view type) {
  if (headless::is_text_input_type(type)) return true;
  // Unknown type values fall back to the text state in browsers.
  return std::none_of(kNonTextualTypes.begin(), kNonTextualTypes.end(), [&](const char* t) { return type == t; });
}

std::string path_of(const html::Node& n) {
  std::vector<std::string> parts;
  for (const html::Node* p = &n; p && p->is_element(); p = p->parent()) {
    parts.push_back(p->tag() + "[" + std::to_string(p->same_tag_index()) + "]");
  }
  std::string out;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    out += '/';
    out += *it;
  }
  return out;
}

std::string element_label(const html::Node& n) {
  std::string text = text_content(n);
  if (text.empty()) text = collapse_whitespace(attr_or(n, "aria-label"));
  if (text.empty() && n.is_element("input")) {
    std::string type = normalized_type(n);
    text = attr_or(n, "value", type == "reset" ? "Reset" : type == "button" ? "" : "Submit");
  }
  if (text.empty()) text = collapse_whitespace(attr_or(n, "title"));
  if (text.empty()) text = collapse_whitespace(attr_or(n, "alt"));
  return truncate_utf8(text, 80);
}

}  // namespace

std::string_view to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::button: return "button";
    case ElementKind::link: return "link";
    case ElementKind::submit_input: return "submit_input";
    case ElementKind::clickable_other: return "clickable_other";
  }
  return "unknown";
}

std::string truncate_utf8(std::string_view text, std::size_t max_chars) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) {
      if (count == max_chars) return std::string(text.substr(0, i));
      ++count;
    }
  }
  return std::string(text);
}

ElementKey element_key(const html::Node& element) {
  std::string identity = element.tag();
  identity += '\x1f';
  identity += to_lower(collapse_whitespace(attr_or(element, "id")));
  identity += '\x1f';
  identity += to_lower(collapse_whitespace(attr_or(element, "name")));
  identity += '\x1f';
  identity += to_lower(truncate_utf8(text_content(element), 64));
  identity += '\x1f';
  identity += path_of(element);
  return ElementKey{element.tag() + ":" + sha256_hex(identity).substr(0, 16)};
}

// ParsedPage

ParsedPage::ParsedPage(driver::PageSnapshot snapshot) : snapshot_(std::move(snapshot)) {
  try {
    document_ = html::Document::parse(snapshot_.html);
  } catch (const html::ParseError& e) {
    throw DomError(Errc::parse_error, e.what());
  }
  for (const auto& g : snapshot_.geometry) geometry_by_id_[g.node_id] = &g;
}

ParsedPage ParsedPage::from_html(std::string html, std::string page_url) {
  driver::PageSnapshot snap;
  snap.url = std::move(page_url);
  snap.html = std::move(html);
  ParsedPage page(std::move(snap));
  page.snapshot_.title = page.document_.title();
  return page;
}

const driver::ElementGeometry* ParsedPage::geometry(const html::Node& element) const {
  const std::string* id = element.attr(driver::kNodeAttribute);
  if (!id) return nullptr;
  auto it = geometry_by_id_.find(*id);
  return it == geometry_by_id_.end() ? nullptr : it->second;
}

bool ParsedPage::displayed(const html::Node& element) const {
  if (const auto* g = geometry(element)) return g->displayed;
  return !statically_hidden(element);
}

bool ParsedPage::enabled(const html::Node& element) const {
  if (element.has_attr("disabled")) return false;
  if (const auto* g = geometry(element)) return g->enabled;
  return true;
}

driver::ElementHandle ParsedPage::handle(const html::Node& element) const {
  driver::ElementHandle h;
  h.remote_id = attr_or(element, driver::kNodeAttribute);
  if (const auto* g = geometry(element)) h.rect = g->rect;
  h.displayed = displayed(element);
  h.enabled = enabled(element);
  return h;
}

const html::Node* ParsedPage::find(const driver::ElementHandle& h) const {
  if (h.remote_id.empty()) return nullptr;
  return document_.find_if([&](const html::Node& n) {
    const std::string* v = n.attr(driver::kNodeAttribute);
    return v && *v == h.remote_id;
  });
}

// Operations

std::vector<InputWidget> detect_input_widgets(const ParsedPage& page, const ContextOptions& options) {
  std::vector<InputWidget> out;
  for (const html::Node* n : page.document().elements()) {
    bool is_input = n->is_element("input");
    if (!is_input && !n->is_element("textarea")) continue;
    std::string type = is_input ? normalized_type(*n) : "text";
    if (is_input && !is_widget_type(type)) continue;
    if (!page.displayed(*n) || !page.enabled(*n) || n->has_attr("readonly")) continue;

    InputWidget w;
    w.node = n;
    w.tag = n->tag();
    w.input_type = is_input && headless::is_text_input_type(type) ? type : "text";
    w.handle = page.handle(*n);
    for (const char* name : {"type", "id", "placeholder", "name", "value"}) {
      if (const std::string* v = n->attr(name)) w.attrs[name] = *v;
    }
    for (const auto& a : n->attributes()) {
      if (a.name != driver::kNodeAttribute) w.raw_attributes[a.name] = a.value;
    }
    w.constraints = extract_constraints(w);
    w.local_context = local_context(page, *n, options);
    std::string value;
    if (const auto* g = page.geometry(*n); g && g->value) {
      value = *g->value;
    } else if (is_input) {
      value = attr_or(*n, "value");
    } else {
      for (const auto& c : n->children()) {
        if (c->is_text()) value += c->data();
      }
    }
    w.filled = !trim(value).empty();
    w.key = element_key(*n);
    out.push_back(std::move(w));
  }
  return out;
}

std::string global_context(const ParsedPage& page) {
  if (!page.snapshot().title.empty()) return trim(page.snapshot().title);
  return page.document().title();
}

std::string local_context(const ParsedPage& page, const html::Node& widget, const ContextOptions& options) {
  // Breadth-first over parent/child edges; the first ring holding text wins.
  std::unordered_set<const html::Node*> visited{&widget};
  std::vector<const html::Node*> ring{&widget};
  for (int distance = 1; distance <= options.local_context_radius && !ring.empty(); ++distance) {
    std::vector<const html::Node*> next;
    for (const html::Node* n : ring) {
      auto consider = [&](const html::Node* m) {
        if (m && m->is_element() && visited.insert(m).second) next.push_back(m);
      };
      consider(n->parent());
      for (const auto& c : n->children()) consider(c.get());
    }
    const html::Node* best = nullptr;
    for (const html::Node* m : next) {
      if (unrendered_tag(m->tag()) || !page.displayed(*m)) continue;
      if (own_text(*m).empty()) continue;
      auto rank = [&](const html::Node* x) { return std::pair{x->order() > widget.order(), x->order()}; };
      if (!best || rank(m) < rank(best)) best = m;
    }
    if (best) return truncate_utf8(own_text(*best), options.local_context_max_chars);
    ring = std::move(next);
  }
  return {};
}

std::vector<ConstraintDescription> extract_constraints(std::string_view tag, std::string_view input_type,
                                                       const std::map<std::string, std::string>& attributes) {
  std::vector<ConstraintDescription> out;
  auto get = [&](const char* name) -> const std::string* {
    auto it = attributes.find(name);
    return it == attributes.end() ? nullptr : &it->second;
  };
  if (tag == "textarea") {
    out.push_back({"", "multi-line input is allowed"});
    return out;
  }
  if (tag != "input") return out;
  std::string type = to_lower(trim(input_type));
  if (type.empty()) type = "text";
  if (type == "text" || type == "password") {
    if (const auto* v = get("maxlength")) out.push_back({"maxlength", "maximum length of " + type + " is " + *v});
    if (const auto* v = get("minlength")) out.push_back({"minlength", "minimum length of " + type + " is " + *v});
  } else if (type == "email") {
    if (get("multiple")) out.push_back({"multiple", "multiple emails are allowed, with each email separated by a comma"});
  } else if (type == "number") {
    if (const auto* v = get("max")) out.push_back({"max", "maximum value of number is " + *v});
    if (const auto* v = get("min")) out.push_back({"min", "minimum value of number is " + *v});
    if (const auto* v = get("step")) {
      const auto* min = get("min");
      out.push_back({"step", "number interval is " + *v + " since " + (min ? *min : std::string("0"))});
    }
  } else if (type == "tel") {
    if (const auto* v = get("pattern")) out.push_back({"pattern", "telephone number has regular expression pattern " + *v});
  }
  return out;
}

std::vector<ConstraintDescription> extract_constraints(const InputWidget& widget) {
  auto attributes = widget.raw_attributes;
  for (const auto& [k, v] : widget.attrs) attributes.emplace(k, v);
  return extract_constraints(widget.tag, widget.input_type, attributes);
}

std::vector<InteractiveElement> candidate_elements(const ParsedPage& page, const CandidateKinds& kinds) {
  std::vector<InteractiveElement> out;
  std::set<ElementKey> seen;
  for (const html::Node* n : page.document().elements()) {
    std::optional<ElementKind> kind;
    if (kinds.buttons && n->is_element("button")) {
      kind = ElementKind::button;
    } else if (kinds.links && n->is_element("a") && n->has_attr("href")) {
      kind = ElementKind::link;
    } else if (kinds.submit_inputs && n->is_element("input")) {
      std::string type = normalized_type(*n);
      if (type == "submit" || type == "button" || type == "reset" || type == "image") kind = ElementKind::submit_input;
    }
    if (!kind && kinds.role_button && iequals(trim(attr_or(*n, "role")), "button")) kind = ElementKind::clickable_other;
    if (!kind && kinds.click_handlers && n->has_attr("onclick")) kind = ElementKind::clickable_other;
    if (!kind) continue;
    if (!page.displayed(*n) || !page.enabled(*n)) continue;
    InteractiveElement e;
    e.node = n;
    e.kind = *kind;
    e.key = element_key(*n);
    if (!seen.insert(e.key).second) continue;
    e.label = element_label(*n);
    e.handle = page.handle(*n);
    out.push_back(std::move(e));
  }
  return out;
}

int dom_distance(const html::Node& a, const html::Node& b) {
  int da = html::depth(a), db = html::depth(b);
  const html::Node* x = &a;
  const html::Node* y = &b;
  int steps = 0;
  while (da > db) {
    x = x->parent();
    --da;
    ++steps;
  }
  while (db > da) {
    y = y->parent();
    --db;
    ++steps;
  }
  while (x != y) {
    if (!x || !y) throw std::invalid_argument("nodes belong to different documents");
    x = x->parent();
    y = y->parent();
    steps += 2;
  }
  return steps;
}

int dom_distance(const ParsedPage& page, const driver::ElementHandle& a, const driver::ElementHandle& b) {
  const html::Node* na = page.find(a);
  const html::Node* nb = page.find(b);
  if (!na || !nb) throw std::invalid_argument("element handle not in page");
  return dom_distance(*na, *nb);
}

InteractiveElement nearest_button(const std::vector<InteractiveElement>& candidates, const html::Node& widget) {
  const InteractiveElement* best = nullptr;
  int best_distance = 0;
  for (const auto& c : candidates) {
    int d = dom_distance(*c.node, widget);
    if (!best || d < best_distance) {
      best = &c;
      best_distance = d;
    }
  }
  if (!best) throw DomError(Errc::no_candidates, "page has no candidate elements");
  return *best;
}

InteractiveElement nearest_button(const ParsedPage& page, const InputWidget& widget, const CandidateKinds& kinds) {
  if (!widget.node) throw std::invalid_argument("widget carries no DOM node");
  return nearest_button(candidate_elements(page, kinds), *widget.node);
}

}  // namespace vetl::dom
