#pragma once

#include <compare>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vetl/driver.hpp"
#include "vetl/html.hpp"

namespace vetl::dom {

enum class Errc { parse_error, no_candidates };

class DomError : public std::runtime_error {
 public:
  DomError(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

/// Stable identity of an element within a session: tag, normalized id/name/text
/// and the DOM path with sibling indices, hashed. Screen position never enters.
struct ElementKey {
  std::string value;

  auto operator<=>(const ElementKey&) const = default;
};

ElementKey element_key(const html::Node& element);

struct ConstraintDescription {
  std::string attribute;
  std::string text;

  bool operator==(const ConstraintDescription&) const = default;
};

struct InputWidget {
  driver::ElementHandle handle;
  std::string tag;         // "input" or "textarea"
  std::string input_type;  // "text" for textarea and untyped inputs
  std::map<std::string, std::string> attrs;           // type/id/placeholder/name/value when present
  std::map<std::string, std::string> raw_attributes;  // every attribute, for constraint rules
  std::vector<ConstraintDescription> constraints;
  std::string local_context;
  bool filled = false;
  ElementKey key;
  const html::Node* node = nullptr;  // owned by the ParsedPage it came from
};

enum class ElementKind { button, link, submit_input, clickable_other };

std::string_view to_string(ElementKind kind);

struct InteractiveElement {
  driver::ElementHandle handle;
  ElementKey key;
  std::string label;
  ElementKind kind = ElementKind::button;
  const html::Node* node = nullptr;
};

/// Which element kinds count as clickable candidates.
struct CandidateKinds {
  bool buttons = true;
  bool links = true;
  bool submit_inputs = true;
  bool role_button = true;
  bool click_handlers = true;
};

struct ContextOptions {
  int local_context_radius = 6;
  std::size_t local_context_max_chars = 120;
};

/// A snapshot with its DOM parsed once and joined to the captured geometry.
class ParsedPage {
 public:
  explicit ParsedPage(driver::PageSnapshot snapshot);
  /// DOM-only page (no geometry); visibility falls back to static rules.
  static ParsedPage from_html(std::string html, std::string page_url = "about:blank");

  ParsedPage(ParsedPage&&) noexcept = default;
  ParsedPage& operator=(ParsedPage&&) noexcept = default;

  const driver::PageSnapshot& snapshot() const { return snapshot_; }
  const html::Document& document() const { return document_; }

  const driver::ElementGeometry* geometry(const html::Node& element) const;
  bool displayed(const html::Node& element) const;
  bool enabled(const html::Node& element) const;
  driver::ElementHandle handle(const html::Node& element) const;
  const html::Node* find(const driver::ElementHandle& handle) const;

 private:
  driver::PageSnapshot snapshot_;
  html::Document document_;
  std::map<std::string, const driver::ElementGeometry*> geometry_by_id_;
};

std::vector<InputWidget> detect_input_widgets(const ParsedPage& page, const ContextOptions& options = {});

std::string global_context(const ParsedPage& page);

std::string local_context(const ParsedPage& page, const html::Node& widget, const ContextOptions& options = {});
inline std::string local_context(const ParsedPage& page, const InputWidget& widget,
                                 const ContextOptions& options = {}) {
  return widget.node ? local_context(page, *widget.node, options) : std::string{};
}

/// Table III rules applied to one widget.
std::vector<ConstraintDescription> extract_constraints(const InputWidget& widget);
std::vector<ConstraintDescription> extract_constraints(std::string_view tag, std::string_view input_type,
                                                       const std::map<std::string, std::string>& attributes);

std::vector<InteractiveElement> candidate_elements(const ParsedPage& page, const CandidateKinds& kinds = {});

/// Edges on the tree path between two nodes through their lowest common ancestor.
int dom_distance(const html::Node& a, const html::Node& b);
int dom_distance(const ParsedPage& page, const driver::ElementHandle& a, const driver::ElementHandle& b);

/// The candidate with minimal DOM distance to the widget; ties go to the
/// earlier element in document order.
InteractiveElement nearest_button(const ParsedPage& page, const InputWidget& widget, const CandidateKinds& kinds = {});
InteractiveElement nearest_button(const std::vector<InteractiveElement>& candidates, const html::Node& widget);

/// Truncates to at most `max_chars` code points.
std::string truncate_utf8(std::string_view text, std::size_t max_chars);

}  // namespace vetl::dom
