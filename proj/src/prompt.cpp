#include "vetl/prompt.hpp"

#include <cctype>
#include <climits>
#include <stdexcept>

#include "vetl/util.hpp"

namespace vetl::prompt {

std::string_view to_string(SectionKind kind) {
  switch (kind) {
    case SectionKind::RP: return "RP";
    case SectionKind::VI: return "VI";
    case SectionKind::GC: return "GC";
    case SectionKind::LC: return "LC";
    case SectionKind::IW: return "IW";
    case SectionKind::OS: return "OS";
  }
  return "?";
}

std::string_view to_string(Flavor flavor) {
  switch (flavor) {
    case Flavor::input_prompt: return "input_prompt";
    case Flavor::element_prompt: return "element_prompt";
    case Flavor::llm_input_prompt: return "llm_input_prompt";
  }
  return "?";
}

std::string_view to_string(AnswerKind kind) {
  switch (kind) {
    case AnswerKind::generated_text: return "generated_text";
    case AnswerKind::button_number: return "button_number";
    case AnswerKind::fallback_raw: return "fallback_raw";
    case AnswerKind::fallback_skip: return "fallback_skip";
  }
  return "?";
}

const Templates& Templates::defaults() {
  static const Templates t = [] {
    Templates d;
    d.entries_ = {
        {"input.RP",
         "You are working as a web tester and your task is to generate appropriate text input for the specified "
         "input box on the web page you are browsing."},
        {"input.VI",
         "You are provided with a screenshot of the web page you are browsing, the input box to be filled is marked "
         "with a red frame."},
        {"input.IW.type", "The input has type {type}."},
        {"input.IW.topic", "The input is about {topic}."},
        {"input.IW.value", "The input can be {value}."},
        {"input.IW.constraints", "The input has the following constraints: {constraints}."},
        {"input.OS",
         "Your job is to generate appropriate text for the highlighted input box. You should only return the "
         "generated text without any explanation. Use the following format for your answer: Generated Input Text: "
         "[answer]"},
        {"element.RP",
         "You are working as a web tester and your task is to select a button on a web page that will be clicked "
         "after filling in the input box, such that the button clicking can submit the filled content and trigger "
         "followup web services."},
        {"element.VI",
         "You are provided with a screenshot of the web page you are browsing, the input box to be filled is marked "
         "with a red frame and the buttons to be selected are marked with {range} and blue frames."},
        {"element.IW", "The input box will be filled with: {generated}."},
        {"element.OS",
         "Your job is to select one of the labeled buttons and return the number on it without any explanation. Use "
         "the following format for your answer: Selected Button Number: [answer]"},
        {"GC", "You are viewing the web page entitled: {title}."},
        {"LC", "This text is placed near the input box: {text}."},
    };
    return d;
  }();
  return t;
}

Templates Templates::parse(std::string_view text) {
  Templates t = defaults();
  int line_no = 0;
  for (const auto& raw_line : split(text, '\n')) {
    ++line_no;
    std::string line = trim(raw_line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("template line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    if (!defaults().entries_.contains(key)) {
      throw std::invalid_argument("template line " + std::to_string(line_no) + ": unknown key " + key);
    }
    t.entries_[key] = trim(line.substr(eq + 1));
  }
  return t;
}

Templates Templates::load(const std::string& path) { return parse(read_file(path)); }

const std::string& Templates::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw std::out_of_range("no prompt template " + key);
  return it->second;
}

std::string humanize_identifier(std::string_view raw) {
  std::string spaced;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    char c = raw[i];
    if (c == '_' || c == '-') {
      spaced.push_back(' ');
      continue;
    }
    bool upper = std::isupper(static_cast<unsigned char>(c));
    if (upper && i > 0 && std::islower(static_cast<unsigned char>(raw[i - 1]))) spaced.push_back(' ');
    spaced.push_back(c);
  }
  return to_lower(collapse_whitespace(spaced));
}

namespace {

std::string fill(std::string tmpl, std::initializer_list<std::pair<std::string_view, std::string_view>> values) {
  for (const auto& [name, value] : values) tmpl = replace_all(std::move(tmpl), "{" + std::string(name) + "}", value);
  return tmpl;
}

PromptBundle assemble(Flavor flavor, std::vector<PromptSection> sections) {
  PromptBundle b;
  b.flavor = flavor;
  for (const auto& s : sections) {
    if (!b.text.empty()) b.text += ' ';
    b.text += s.text;
  }
  b.sections = std::move(sections);
  return b;
}

// Shrinks `field` until the rendered prompt fits, returning false when the
// field is exhausted first.
template <typename Render>
bool shrink_to_fit(std::string& field, std::size_t max_chars, Render render) {
  std::size_t length = render().text.size();
  if (length <= max_chars) return true;
  std::size_t overflow = length - max_chars;
  if (overflow >= field.size()) {
    field.clear();
    return render().text.size() <= max_chars;
  }
  field = dom::truncate_utf8(field, field.size() - overflow);
  while (render().text.size() > max_chars && !field.empty()) field.pop_back();
  return render().text.size() <= max_chars;
}

}  // namespace

PromptBundle build_input_prompt(const std::string& global_context, const std::string& local_context,
                                const dom::InputWidget& widget, InputFlavor flavor, const Templates& templates,
                                const PromptOptions& options) {
  std::string gc = global_context, lc = local_context;
  std::string topic;
  for (const auto& attr : options.topic_priority) {
    auto it = widget.attrs.find(attr);
    if (it != widget.attrs.end() && !trim(it->second).empty()) {
      topic = options.humanize_topic ? humanize_identifier(it->second) : it->second;
      break;
    }
  }
  auto value_it = widget.attrs.find("value");
  std::string value = value_it == widget.attrs.end() ? std::string{} : value_it->second;
  bool has_value = value_it != widget.attrs.end();
  auto type_it = widget.attrs.find("type");
  std::string constraints;
  for (const auto& c : widget.constraints) {
    if (!constraints.empty()) constraints += "; ";
    constraints += c.text;
  }

  auto render = [&] {
    std::vector<PromptSection> s;
    s.push_back({SectionKind::RP, templates.get("input.RP")});
    if (flavor == InputFlavor::vision) s.push_back({SectionKind::VI, templates.get("input.VI")});
    s.push_back({SectionKind::GC, fill(templates.get("GC"), {{"title", gc}})});
    s.push_back({SectionKind::LC, fill(templates.get("LC"), {{"text", lc}})});
    if (type_it != widget.attrs.end()) {
      s.push_back({SectionKind::IW, fill(templates.get("input.IW.type"), {{"type", type_it->second}})});
    }
    if (!topic.empty()) s.push_back({SectionKind::IW, fill(templates.get("input.IW.topic"), {{"topic", topic}})});
    if (has_value) s.push_back({SectionKind::IW, fill(templates.get("input.IW.value"), {{"value", value}})});
    if (!constraints.empty()) {
      s.push_back({SectionKind::IW, fill(templates.get("input.IW.constraints"), {{"constraints", constraints}})});
    }
    s.push_back({SectionKind::OS, templates.get("input.OS")});
    return assemble(flavor == InputFlavor::vision ? Flavor::input_prompt : Flavor::llm_input_prompt, std::move(s));
  };

  if (!shrink_to_fit(lc, options.max_chars, render) && !shrink_to_fit(gc, options.max_chars, render) &&
      !shrink_to_fit(value, options.max_chars, render)) {
    shrink_to_fit(topic, options.max_chars, render);
  }
  return render();
}

PromptBundle build_element_prompt(const std::string& global_context, const std::string& local_context,
                                  const std::string& generated_text, int button_count, const Templates& templates,
                                  const PromptOptions& options) {
  if (button_count < 1) throw std::invalid_argument("element prompt needs at least one button");
  std::string range;
  for (int i = 1; i <= button_count; ++i) {
    if (i > 1) range += ',';
    range += std::to_string(i);
  }
  std::string gc = global_context, lc = local_context, generated = generated_text;
  auto render = [&] {
    std::vector<PromptSection> s;
    s.push_back({SectionKind::RP, templates.get("element.RP")});
    s.push_back({SectionKind::VI, fill(templates.get("element.VI"), {{"range", range}})});
    s.push_back({SectionKind::GC, fill(templates.get("GC"), {{"title", gc}})});
    s.push_back({SectionKind::LC, fill(templates.get("LC"), {{"text", lc}})});
    s.push_back({SectionKind::IW, fill(templates.get("element.IW"), {{"generated", generated}})});
    s.push_back({SectionKind::OS, templates.get("element.OS")});
    return assemble(Flavor::element_prompt, std::move(s));
  };
  if (!shrink_to_fit(lc, options.max_chars, render) && !shrink_to_fit(gc, options.max_chars, render)) {
    shrink_to_fit(generated, options.max_chars, render);
  }
  return render();
}

ParsedAnswer parse_text_answer(std::string_view raw) {
  ParsedAnswer a;
  auto pos = irfind(raw, kTextMarker);
  if (pos == std::string_view::npos) {
    a.kind = AnswerKind::fallback_raw;
    a.text_value = trim(raw);
    return a;
  }
  a.kind = AnswerKind::generated_text;
  a.text_value = trim(raw.substr(pos + kTextMarker.size()));
  return a;
}

namespace {

struct IntegerToken {
  long long value;
  bool negative;
};

// First run of digits in `s`; `standalone` rejects digits glued to letters.
std::optional<IntegerToken> first_integer(std::string_view s, bool standalone) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) continue;
    std::size_t j = i;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
    bool glued = (i > 0 && std::isalpha(static_cast<unsigned char>(s[i - 1]))) ||
                 (j < s.size() && std::isalpha(static_cast<unsigned char>(s[j])));
    if (standalone && glued) {
      i = j;
      continue;
    }
    auto digits = s.substr(i, j - i);
    long long v = digits.size() > 9 ? LLONG_MAX : std::stoll(std::string(digits));
    return IntegerToken{v, i > 0 && s[i - 1] == '-'};
  }
  return std::nullopt;
}

}  // namespace

ParsedAnswer parse_button_answer(std::string_view raw, const std::set<int>& valid) {
  ParsedAnswer skip{AnswerKind::fallback_skip, std::nullopt, std::nullopt};
  auto pos = irfind(raw, kButtonMarker);
  auto token = pos == std::string_view::npos ? first_integer(raw, true)
                                             : first_integer(raw.substr(pos + kButtonMarker.size()), false);
  if (!token || token->negative || token->value > INT_MAX) return skip;
  int n = static_cast<int>(token->value);
  if (!valid.contains(n)) return skip;
  return ParsedAnswer{AnswerKind::button_number, std::nullopt, n};
}

}  // namespace vetl::prompt
