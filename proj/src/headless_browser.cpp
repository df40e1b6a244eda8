#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <regex>

#include "vetl/driver_scripts.hpp"
#include "vetl/headless.hpp"
#include "vetl/url.hpp"
#include "vetl/util.hpp"

namespace vetl::headless {

using nlohmann::json;

int CommandError::http_status() const {
  if (error_ == "invalid session id" || error_ == "no such element" || error_ == "stale element reference" ||
      error_ == "unknown command" || error_ == "no such window") {
    return 404;
  }
  if (error_ == "invalid argument" || error_ == "element not interactable" || error_ == "invalid element state") {
    return 400;
  }
  return 500;
}

Fetcher http_fetcher() {
  return [](const std::string& target) -> FetchResult {
    auto u = url::parse(target);
    if (!u || u->scheme != "http") return {0, {}, "net::ERR_UNKNOWN_URL_SCHEME"};
    httplib::Client client(u->origin());
    client.set_connection_timeout(std::chrono::seconds(5));
    client.set_read_timeout(std::chrono::seconds(10));
    auto res = client.Get(u->path + (u->has_query ? "?" + u->query : ""));
    if (!res) return {0, {}, "net::ERR_CONNECTION_REFUSED"};
    return {res->status, res->body, {}};
  };
}

namespace {

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

const char* reason_phrase(int status) {
  switch (status) {
    case 400: return "Bad Request";
    case 403: return "Forbidden";
    case 404: return "Not Found";
    case 500: return "Internal Server Error";
    default: return "Error";
  }
}

std::string type_of(const html::Node& n) {
  const std::string* t = n.attr("type");
  return t ? to_lower(trim(*t)) : std::string{};
}

bool is_submit_button(const html::Node& n) {
  if (n.is_element("button")) {
    std::string t = type_of(n);
    return t.empty() || t == "submit";
  }
  if (n.is_element("input")) {
    std::string t = type_of(n);
    return t == "submit" || t == "image";
  }
  return false;
}

std::optional<double> parse_number(const std::string& s) {
  std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  static const std::regex kNumber(R"(^-?(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?$)");
  if (!std::regex_match(t, kNumber)) return std::nullopt;
  return std::stod(t);
}

bool valid_email(std::string_view v) {
  static const std::regex kEmail(R"(^[A-Za-z0-9.!#$%&'*+/=?^_`{|}~-]+@[A-Za-z0-9-]+(\.[A-Za-z0-9-]+)*$)");
  return std::regex_match(std::string(v), kEmail);
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::string script_tag(const std::string& script) {
  auto start = script.find("/*vetl:");
  if (start == std::string::npos) return {};
  auto end = script.find("*/", start);
  if (end == std::string::npos) return {};
  return script.substr(start, end + 2 - start);
}

}  // namespace

Browser::Browser(Fetcher fetcher) : fetcher_(std::move(fetcher)) { load("about:blank", 0); }

void Browser::set_viewport(int width, int height) {
  if (width <= 0 || height <= 0) throw CommandError("invalid argument", "window size must be positive");
  viewport_w_ = width;
  viewport_h_ = height;
  scroll_y_ = 0;
  invalidate_layout();
}

void Browser::tick() {
  if (armed_navigation_) {
    if (--armed_navigation_->first <= 0) {
      std::string target = armed_navigation_->second;
      armed_navigation_.reset();
      load(target, 0);
    }
  }
  if (refresh_ && std::chrono::steady_clock::now() >= refresh_->first) {
    std::string target = refresh_->second;
    refresh_.reset();
    load(target, 0);
  }
}

void Browser::navigate_after_commands(int n, std::string target) { armed_navigation_ = {n, std::move(target)}; }

void Browser::log_severe(const std::string& source, const std::string& message, const std::string& where) {
  console_.push_back({now_ms(), "SEVERE", source, message, where});
}

void Browser::navigate(const std::string& target) {
  tick();
  auto parsed = url::parse(target);
  if (!parsed) throw CommandError("invalid argument", "invalid URL: " + target);
  load(parsed->str(), 0);
}

void Browser::load(const std::string& target, int redirects) {
  auto parsed = url::parse(target);
  std::string body;
  refresh_.reset();
  if (parsed && parsed->scheme == "about") {
    body = "<html><head></head><body></body></html>";
  } else {
    FetchResult res = fetcher_(target);
    if (res.status == 0) throw CommandError("unknown error", "unknown error: " + res.error);
    if (res.status >= 400) {
      log_severe("network",
                 target + " - Failed to load resource: the server responded with a status of " +
                     std::to_string(res.status) + " (" + reason_phrase(res.status) + ")",
                 target);
    }
    body = std::move(res.body);
  }
  try {
    doc_ = html::Document::parse(body);
  } catch (const html::ParseError&) {
    doc_ = html::Document::parse("<html><head></head><body></body></html>");
  }
  url_ = parsed ? parsed->str() : target;
  ++documents_loaded_;
  token_ = "doc-" + std::to_string(documents_loaded_);
  controls_ = {};
  scroll_y_ = 0;
  element_ids_.clear();
  invalidate_layout();

  // Sub-resources: only images are fetched, to surface load failures.
  auto base = url::parse(url_);
  for (const html::Node* n : doc_.elements()) {
    if (!n->is_element("img") || !n->attr("src") || !base) continue;
    auto src = url::resolve(*base, *n->attr("src"));
    if (!src || src->scheme != "http") continue;
    FetchResult res = fetcher_(src->str());
    if (res.status == 0 || res.status >= 400) {
      std::string detail = res.status == 0 ? res.error
                                           : "the server responded with a status of " + std::to_string(res.status) +
                                                 " (" + reason_phrase(res.status) + ")";
      log_severe("network", src->str() + " - Failed to load resource: " + detail, src->str());
    }
  }

  for (const html::Node* n : doc_.elements()) {
    if (!n->is_element("meta") || !n->attr("http-equiv") || !iequals(*n->attr("http-equiv"), "refresh")) continue;
    const std::string* content = n->attr("content");
    if (!content || !base) break;
    auto semi = content->find(';');
    double delay = std::atof(content->substr(0, semi).c_str());
    std::string target_ref;
    if (semi != std::string::npos) {
      std::string rest = trim(content->substr(semi + 1));
      if (starts_with_icase(rest, "url=")) rest = rest.substr(4);
      target_ref = trim(rest);
      if (target_ref.size() >= 2 && (target_ref.front() == '\'' || target_ref.front() == '"')) {
        target_ref = target_ref.substr(1, target_ref.size() - 2);
      }
    }
    auto dest = url::resolve(*base, target_ref);
    if (!dest) break;
    if (delay <= 0 && redirects < 10) {
      load(dest->str(), redirects + 1);
      return;
    }
    refresh_ = {std::chrono::steady_clock::now() + std::chrono::milliseconds(static_cast<long>(delay * 1000)),
                dest->str()};
    break;
  }
}

const Layout& Browser::current_layout() {
  if (!layout_) layout_ = layout_document(doc_, viewport_w_);
  return *layout_;
}

std::string Browser::current_url() {
  tick();
  return url_;
}

std::string Browser::title() {
  tick();
  return doc_.title();
}

json Browser::execute(const std::string& script, const json& args) {
  tick();
  const std::string tag = script_tag(script);
  if (tag == driver::scripts::kSnapshotTag) {
    std::string stamp = args.is_array() && !args.empty() && args[0].is_string() ? args[0].get<std::string>() : "g0";
    for (const html::Node* n : doc_.elements()) {
      const_cast<html::Node*>(n)->set_attr("data-vetl-node", stamp + "-" + std::to_string(n->order()));
    }
    const Layout& layout = current_layout();
    json elements = json::array();
    for (const html::Node* n : doc_.elements()) {
      Box b = layout.box(n);
      json e = {{"id", stamp + "-" + std::to_string(n->order())},
                {"x", b.rect.x},
                {"y", b.rect.y},
                {"w", b.rect.width},
                {"h", b.rect.height},
                {"displayed", b.displayed},
                {"enabled", !n->has_attr("disabled")}};
      if (n->is_element("input") || n->is_element("textarea")) e["value"] = controls_.value_of(*n);
      elements.push_back(std::move(e));
    }
    const html::Node* root = doc_.first_element("html");
    return {{"url", url_},
            {"title", doc_.title()},
            {"token", token_},
            {"html", root ? html::serialize(*root) : std::string{}},
            {"dpr", dpr_},
            {"sx", 0},
            {"sy", scroll_y_},
            {"vw", viewport_w_},
            {"vh", viewport_h_},
            {"elements", std::move(elements)}};
  }
  if (tag == driver::scripts::kPageTag) return {{"url", url_}, {"token", token_}, {"ready", "complete"}};
  if (tag == driver::scripts::kViewportTag) return {{"vw", viewport_w_}, {"vh", viewport_h_}, {"dpr", dpr_}};
  if (tag == driver::scripts::kDrainTag) {
    json out = json::array();
    for (const auto& c : console_) out.push_back({{"t", c.timestamp_ms}, {"m", c.message}, {"s", c.url}});
    console_.clear();
    return out;
  }
  if (tag == driver::scripts::kScrollTag) {
    std::string id = args.is_array() && !args.empty() && args[0].is_string() ? args[0].get<std::string>() : "";
    const html::Node* target = doc_.find_if([&](const html::Node& n) {
      const std::string* v = n.attr("data-vetl-node");
      return v && *v == id;
    });
    if (!target) return false;
    const Layout& layout = current_layout();
    Rect r = layout.box(target).rect;
    double max_scroll = std::max(0.0, layout.content_height - viewport_h_);
    scroll_y_ = std::clamp(std::floor(r.y + r.height / 2 - viewport_h_ / 2.0), 0.0, max_scroll);
    return true;
  }
  throw CommandError("javascript error", "script not supported by the built-in browser");
}

std::vector<std::uint8_t> Browser::screenshot_png() {
  tick();
  return encode_png(render_viewport(current_layout(), controls_, viewport_w_, viewport_h_, scroll_y_, dpr_));
}

std::string Browser::find_element(const std::string& selector) {
  tick();
  static const std::regex kAttr(R"(^\[([A-Za-z_:][-A-Za-z0-9_:.]*)=["']([^"']*)["']\]$)");
  static const std::regex kId(R"(^#([-A-Za-z0-9_]+)$)");
  static const std::regex kTag(R"(^([A-Za-z][A-Za-z0-9]*)$)");
  std::smatch m;
  std::function<bool(const html::Node&)> pred;
  std::string s = trim(selector);
  if (std::regex_match(s, m, kAttr)) {
    std::string name = to_lower(m[1].str()), value = m[2].str();
    pred = [name, value](const html::Node& n) {
      const std::string* v = n.attr(name);
      return v && *v == value;
    };
  } else if (std::regex_match(s, m, kId)) {
    std::string value = m[1].str();
    pred = [value](const html::Node& n) {
      const std::string* v = n.attr("id");
      return v && *v == value;
    };
  } else if (std::regex_match(s, m, kTag)) {
    std::string tag = to_lower(m[1].str());
    pred = [tag](const html::Node& n) { return n.tag() == tag; };
  } else {
    throw CommandError("invalid selector", "unsupported selector: " + selector);
  }
  const html::Node* found = doc_.find_if(pred);
  if (!found) throw CommandError("no such element", "no element matches " + selector);
  std::string id = "e" + std::to_string(++next_element_id_);
  element_ids_[id] = {documents_loaded_, const_cast<html::Node*>(found)};
  return id;
}

html::Node* Browser::resolve_element(const std::string& element_id) {
  auto it = element_ids_.find(element_id);
  if (it == element_ids_.end() || it->second.first != documents_loaded_) {
    throw CommandError("stale element reference", "element " + element_id + " is not attached to the page");
  }
  return it->second.second;
}

const html::Node* Browser::form_owner(const html::Node& control) const {
  if (const std::string* id = control.attr("form")) {
    return doc_.find_if([&](const html::Node& n) { return n.is_element("form") && n.attr("id") && *n.attr("id") == *id; });
  }
  for (const html::Node* p = control.parent(); p; p = p->parent()) {
    if (p->is_element("form")) return p;
  }
  return nullptr;
}

std::vector<const html::Node*> Browser::form_controls(const html::Node& form) const {
  std::vector<const html::Node*> out;
  for (const html::Node* n : doc_.elements()) {
    if (!(n->is_element("input") || n->is_element("textarea") || n->is_element("select") || n->is_element("button"))) {
      continue;
    }
    if (form_owner(*n) == &form) out.push_back(n);
  }
  return out;
}

bool Browser::control_valid(const html::Node& n) const {
  if (n.has_attr("disabled") || n.is_element("button")) return true;
  std::string type = n.is_element("input") ? type_of(n) : std::string{};
  if (type.empty() && n.is_element("input")) type = "text";
  if (type == "hidden" || type == "submit" || type == "button" || type == "reset" || type == "image") return true;
  if (type == "checkbox" || type == "radio") return !n.has_attr("required") || controls_.is_checked(n);
  std::string value = controls_.value_of(n);
  if (value.empty()) return !n.has_attr("required");
  if (const std::string* maxlength = n.attr("maxlength")) {
    if (auto limit = parse_number(*maxlength); limit && utf8_length(value) > static_cast<std::size_t>(*limit)) return false;
  }
  if (const std::string* minlength = n.attr("minlength")) {
    if (auto limit = parse_number(*minlength); limit && utf8_length(value) < static_cast<std::size_t>(*limit)) return false;
  }
  if (type == "email") {
    if (n.has_attr("multiple")) {
      for (const auto& part : split(value, ',')) {
        if (!valid_email(trim(part))) return false;
      }
    } else if (!valid_email(trim(value))) {
      return false;
    }
  }
  if (type == "url") {
    auto u = url::parse(value);
    if (!u) return false;
  }
  if (type == "number") {
    auto v = parse_number(value);
    if (!v) return false;
    std::optional<double> min;
    if (n.attr("min")) min = parse_number(*n.attr("min"));
    auto max = n.attr("max") ? parse_number(*n.attr("max")) : std::nullopt;
    if (min && *v < *min) return false;
    if (max && *v > *max) return false;
    const std::string* step_attr = n.attr("step");
    if (!step_attr || !iequals(trim(*step_attr), "any")) {
      double step = 1;
      if (step_attr) {
        if (auto s = parse_number(*step_attr); s && *s > 0) step = *s;
      }
      double base = min.value_or(0);
      double k = (*v - base) / step;
      if (std::fabs(k - std::round(k)) > 1e-9) return false;
    }
  }
  if (const std::string* pattern = n.attr("pattern"); pattern && !pattern->empty() && type != "number") {
    try {
      if (!std::regex_match(value, std::regex("^(?:" + *pattern + ")$"))) return false;
    } catch (const std::regex_error&) {
    }
  }
  return true;
}

void Browser::submit_form(const html::Node& form, const html::Node* submitter) {
  bool validate = !form.has_attr("novalidate") && !(submitter && submitter->has_attr("formnovalidate"));
  auto controls = form_controls(form);
  if (validate) {
    for (const html::Node* c : controls) {
      if (!control_valid(*c)) return;  // blocked, as a browser shows a validation bubble
    }
  }
  std::string query;
  auto add = [&](const std::string& name, const std::string& value) {
    if (!query.empty()) query += '&';
    query += url::percent_encode_form(name) + "=" + url::percent_encode_form(value);
  };
  for (const html::Node* c : controls) {
    const std::string* name = c->attr("name");
    if (!name || name->empty() || c->has_attr("disabled")) continue;
    if (c->is_element("button") || (c->is_element("input") && is_submit_button(*c))) {
      if (c == submitter) add(*name, controls_.value_of(*c));
      continue;
    }
    std::string type = c->is_element("input") ? type_of(*c) : std::string{};
    if (type == "button" || type == "reset" || type == "file") continue;
    if (type == "checkbox" || type == "radio") {
      if (controls_.is_checked(*c)) add(*name, c->attr("value") ? *c->attr("value") : "on");
      continue;
    }
    add(*name, controls_.value_of(*c));
  }
  auto base = url::parse(url_);
  if (!base) return;
  std::string action_ref;
  if (submitter && submitter->attr("formaction")) {
    action_ref = *submitter->attr("formaction");
  } else if (form.attr("action")) {
    action_ref = *form.attr("action");
  }
  auto action = url::resolve(*base, action_ref);
  if (!action) return;
  action->query = query;
  action->has_query = true;
  action->has_fragment = false;
  action->fragment.clear();
  load(action->str(), 0);
}

void Browser::click(const std::string& element_id) {
  tick();
  html::Node* n = resolve_element(element_id);
  const Layout& layout = current_layout();
  Box box = layout.box(n);
  if (!box.displayed || n->has_attr("disabled")) {
    throw CommandError("element not interactable", "element is not displayed or disabled");
  }
  for (const html::Node* cur = n; cur; cur = cur->parent()) {
    if (!cur->is_element()) continue;
    if (cur->is_element("a") && cur->attr("href")) {
      std::string href = trim(*cur->attr("href"));
      if (starts_with_icase(href, "javascript:")) return;
      auto base = url::parse(url_);
      auto dest = base ? url::resolve(*base, href) : std::nullopt;
      if (!dest) return;
      if (dest->without_fragment() == base->without_fragment() && dest->has_fragment) {
        url_ = dest->str();  // same-document fragment navigation
        return;
      }
      load(dest->str(), 0);
      return;
    }
    if (is_submit_button(*cur)) {
      if (const html::Node* form = form_owner(*cur)) submit_form(*form, cur);
      return;
    }
    if (cur->is_element("button") || cur->is_element("select") || cur->is_element("textarea")) return;
    if (cur->is_element("input")) {
      std::string type = type_of(*cur);
      if (type == "checkbox") {
        controls_.checked[cur] = !controls_.is_checked(*cur);
        invalidate_layout();
      } else if (type == "radio") {
        controls_.checked[cur] = true;
      } else if (type == "reset") {
        if (const html::Node* form = form_owner(*cur)) {
          for (const html::Node* c : form_controls(*form)) controls_.values.erase(c);
        }
      }
      return;
    }
  }
}

void Browser::clear(const std::string& element_id) {
  tick();
  html::Node* n = resolve_element(element_id);
  if (!(n->is_element("input") || n->is_element("textarea")) || n->has_attr("disabled") || n->has_attr("readonly")) {
    throw CommandError("invalid element state", "element is not editable");
  }
  controls_.values[n] = "";
}

void Browser::send_keys(const std::string& element_id, const std::string& text) {
  tick();
  html::Node* n = resolve_element(element_id);
  bool editable = n->is_element("textarea") || (n->is_element("input") && is_text_input_type(type_of(*n).empty() ? "text" : type_of(*n)));
  if (!editable || n->has_attr("disabled") || n->has_attr("readonly")) {
    throw CommandError("element not interactable", "element is not a text control");
  }
  if (!current_layout().box(n).displayed) throw CommandError("element not interactable", "element is not displayed");
  static const std::string kEnter = "\xEE\x80\x87";  // U+E007
  std::string typed = text;
  bool submit = false;
  if (auto pos = typed.find(kEnter); pos != std::string::npos) {
    typed = typed.substr(0, pos);
    submit = true;
  }
  std::string current = controls_.value_of(*n);
  controls_.values[n] = current + typed;
  if (submit && n->is_element("input")) {
    if (const html::Node* form = form_owner(*n)) {
      const html::Node* default_button = nullptr;
      for (const html::Node* c : form_controls(*form)) {
        if (is_submit_button(*c)) {
          default_button = c;
          break;
        }
      }
      submit_form(*form, default_button);
    }
  }
}

json Browser::property(const std::string& element_id, const std::string& name) {
  tick();
  html::Node* n = resolve_element(element_id);
  if (name == "value") return controls_.value_of(*n);
  if (name == "checked") return controls_.is_checked(*n);
  if (name == "tagName") return to_lower(n->tag());
  const std::string* v = n->attr(name);
  return v ? json(*v) : json();
}

json Browser::take_log() {
  tick();
  json out = json::array();
  for (const auto& c : console_) {
    out.push_back({{"level", c.level},
                   {"message", c.message},
                   {"source", c.source},
                   {"timestamp", c.timestamp_ms},
                   {"url", c.url}});
  }
  console_.clear();
  return out;
}

}  // namespace vetl::headless
