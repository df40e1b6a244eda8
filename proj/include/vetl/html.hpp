#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vetl::html {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class NodeType { document, element, text, comment, doctype };

struct Attribute {
  std::string name;
  std::string value;
};

class Node {
 public:
  explicit Node(NodeType type, std::string name = {}) : type_(type), name_(std::move(name)) {}

  NodeType type() const { return type_; }
  bool is_element() const { return type_ == NodeType::element; }
  bool is_element(std::string_view tag) const { return type_ == NodeType::element && name_ == tag; }
  bool is_text() const { return type_ == NodeType::text; }

  /// Lower-cased tag name for elements.
  const std::string& tag() const { return name_; }
  /// Character data of text and comment nodes (entities decoded).
  const std::string& data() const { return data_; }
  std::string& data() { return data_; }

  const std::vector<Attribute>& attributes() const { return attributes_; }
  const std::string* attr(std::string_view name) const;
  bool has_attr(std::string_view name) const { return attr(name) != nullptr; }
  void set_attr(std::string_view name, std::string value);
  void remove_attr(std::string_view name);

  Node* parent() const { return parent_; }
  const std::vector<std::unique_ptr<Node>>& children() const { return children_; }
  Node* append(std::unique_ptr<Node> child);

  /// Position of this element in document order (elements only); -1 for other nodes.
  int order() const { return order_; }
  /// Index of this node among its parent's element children.
  int element_index() const;
  /// Index among preceding element siblings with the same tag.
  int same_tag_index() const;

  std::vector<const Node*> element_children() const;

 private:
  friend class Document;

  NodeType type_;
  std::string name_;
  std::string data_;
  std::vector<Attribute> attributes_;
  Node* parent_ = nullptr;
  std::vector<std::unique_ptr<Node>> children_;
  int order_ = -1;
};

/// An owned, parsed HTML document. Node addresses are stable for the lifetime
/// of the Document.
class Document {
 public:
  Document();
  Document(Document&&) noexcept = default;
  Document& operator=(Document&&) noexcept = default;

  /// Tolerant HTML parse. Throws ParseError only when the input is not UTF-8.
  static Document parse(std::string_view html);

  const Node& root() const { return *root_; }
  Node& root() { return *root_; }

  /// All elements in document (pre-)order.
  const std::vector<Node*>& elements() const { return elements_; }
  const Node* first_element(std::string_view tag) const;
  const Node* find_if(const std::function<bool(const Node&)>& pred) const;

  /// Text of the first <title>, whitespace-collapsed.
  std::string title() const;

  /// Recomputes element order after structural edits.
  void reindex();

 private:
  std::unique_ptr<Node> root_;
  std::vector<Node*> elements_;
};

bool is_void_element(std::string_view tag);

std::string decode_entities(std::string_view text);
std::string escape_text(std::string_view text);
std::string escape_attribute(std::string_view text);

/// outerHTML-style serialization (the document node serializes its children).
std::string serialize(const Node& node);

/// Whitespace-collapsed text of the node's direct text children.
std::string own_text(const Node& node);

/// Whitespace-collapsed descendant text, skipping script/style/template.
std::string text_content(const Node& node);

/// Number of edges from the root of the tree.
int depth(const Node& node);

}  // namespace vetl::html
