#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vetl/dom_context.hpp"
#include "vetl/raster.hpp"

namespace vetl::prompt {

enum class SectionKind { RP, VI, GC, LC, IW, OS };
enum class Flavor { input_prompt, element_prompt, llm_input_prompt };
enum class InputFlavor { vision, text_only };

std::string_view to_string(SectionKind kind);
std::string_view to_string(Flavor flavor);

struct PromptSection {
  SectionKind kind;
  std::string text;
};

struct PromptBundle {
  Flavor flavor = Flavor::input_prompt;
  std::string text;
  std::vector<PromptSection> sections;
  std::optional<Image> image;
  std::map<int, dom::ElementKey> button_numbering;
};

/// Sentence templates keyed by "<flavor>.<section>" (e.g. "input.RP") plus the
/// shared "GC" and "LC". Placeholders use {name} syntax.
class Templates {
 public:
  static const Templates& defaults();
  /// Starts from the defaults and overrides keys found in a `key = value` file.
  static Templates load(const std::string& path);
  static Templates parse(std::string_view text);

  const std::string& get(const std::string& key) const;
  void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

struct PromptOptions {
  std::vector<std::string> topic_priority{"id", "placeholder", "name"};
  bool humanize_topic = true;
  std::size_t max_chars = 4000;
};

/// Lower-cases an attribute value and splits camelCase/snake_case/kebab-case
/// into words ("eventName" -> "event name").
std::string humanize_identifier(std::string_view raw);

PromptBundle build_input_prompt(const std::string& global_context, const std::string& local_context,
                                const dom::InputWidget& widget, InputFlavor flavor,
                                const Templates& templates = Templates::defaults(), const PromptOptions& options = {});

PromptBundle build_element_prompt(const std::string& global_context, const std::string& local_context,
                                  const std::string& generated_text, int button_count,
                                  const Templates& templates = Templates::defaults(),
                                  const PromptOptions& options = {});

enum class AnswerKind { generated_text, button_number, fallback_raw, fallback_skip };

std::string_view to_string(AnswerKind kind);

struct ParsedAnswer {
  AnswerKind kind = AnswerKind::fallback_skip;
  std::optional<std::string> text_value;
  std::optional<int> number_value;
};

inline constexpr std::string_view kTextMarker = "Generated Input Text:";
inline constexpr std::string_view kButtonMarker = "Selected Button Number:";

ParsedAnswer parse_text_answer(std::string_view raw);
ParsedAnswer parse_button_answer(std::string_view raw, const std::set<int>& valid);

}  // namespace vetl::prompt
