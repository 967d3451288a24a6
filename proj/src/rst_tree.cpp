#include "rhetprobe/rst_tree.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <utility>

#include "rhetprobe/error.hpp"

namespace rhetprobe {

namespace {

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool has_token(std::string_view text) {
  for (char c : text)
    if (!is_ws(c)) return true;
  return false;
}

void validate_node(const RstNode& node, std::size_t offset) {
  if (node.is_leaf()) {
    if (!node.relation.empty() || !node.nuclearity.empty())
      throw ArityError("relation node without children", offset);
    if (!has_token(node.text)) throw SyntaxError("empty EDU", offset);
    return;
  }
  if (node.children.size() < 2)
    throw ArityError("relation '" + node.relation + "' has fewer than two children", offset);
  if (node.relation.empty()) throw SyntaxError("empty relation label", offset);
  for (char c : node.relation)
    if (is_ws(c) || c == '[' || c == '(' || c == ')') throw SyntaxError("bad character in relation label", offset);
  if (node.nuclearity.size() != node.children.size())
    throw SyntaxError("nuclearity tag '" + node.nuclearity + "' does not match arity " +
                          std::to_string(node.children.size()),
                      offset);
  bool nucleus = false;
  for (char c : node.nuclearity) {
    if (c != 'N' && c != 'S') throw SyntaxError("nuclearity tag must use N and S", offset);
    nucleus = nucleus || c == 'N';
  }
  if (!nucleus) throw SyntaxError("nuclearity tag has no nucleus", offset);
  if (!node.text.empty()) throw SyntaxError("relation node carries EDU text", offset);
  for (const auto& child : node.children) validate_node(child, offset);
}

class Parser {
 public:
  explicit Parser(std::string_view in) : in_(in) {}

  RstTree run() {
    skip_ws();
    RstNode root = tree();
    skip_ws();
    if (pos_ != in_.size()) throw SyntaxError("trailing characters after tree", pos_);
    return RstTree(std::move(root));
  }

 private:
  RstNode tree() {
    if (pos_ >= in_.size()) throw SyntaxError("unexpected end of input", pos_);
    if (in_[pos_] == '[') return leaf();
    if (in_[pos_] == '(') return internal();
    throw SyntaxError(std::string("expected '(' or '[' but found '") + in_[pos_] + "'", pos_);
  }

  RstNode leaf() {
    const std::size_t start = pos_;
    ++pos_;
    std::string text;
    while (true) {
      if (pos_ >= in_.size()) throw SyntaxError("unterminated EDU", start);
      char c = in_[pos_];
      if (c == ']') break;
      if (c == '[') throw SyntaxError("unescaped '[' inside EDU", pos_);
      if (c == '\\') {
        if (pos_ + 1 >= in_.size()) throw SyntaxError("dangling escape", pos_);
        char e = in_[pos_ + 1];
        if (e != '[' && e != ']' && e != '\\') throw SyntaxError("invalid escape sequence", pos_);
        text.push_back(e);
        pos_ += 2;
        continue;
      }
      text.push_back(c);
      ++pos_;
    }
    ++pos_;
    if (!has_token(text)) throw SyntaxError("empty EDU", start);
    return RstNode::leaf(std::move(text));
  }

  RstNode internal() {
    const std::size_t start = pos_;
    ++pos_;
    const std::size_t label_start = pos_;
    while (pos_ < in_.size() && !is_ws(in_[pos_]) && in_[pos_] != '[' && in_[pos_] != '(' &&
           in_[pos_] != ')')
      ++pos_;
    if (pos_ == label_start) throw SyntaxError("missing relation label", label_start);
    std::string label(in_.substr(label_start, pos_ - label_start));
    if (pos_ >= in_.size() || in_[pos_] != '[') throw SyntaxError("expected '[' before nuclearity tag", pos_);
    ++pos_;
    const std::size_t tag_start = pos_;
    while (pos_ < in_.size() && (in_[pos_] == 'N' || in_[pos_] == 'S')) ++pos_;
    if (pos_ >= in_.size() || in_[pos_] != ']') throw SyntaxError("bad nuclearity tag", pos_);
    std::string tag(in_.substr(tag_start, pos_ - tag_start));
    if (tag.empty()) throw SyntaxError("empty nuclearity tag", tag_start);
    ++pos_;

    std::vector<RstNode> children;
    while (true) {
      const std::size_t before = pos_;
      skip_ws();
      if (pos_ >= in_.size()) throw SyntaxError("unbalanced '('", start);
      if (in_[pos_] == ')') break;
      if (pos_ == before) throw SyntaxError("expected whitespace before child", pos_);
      children.push_back(tree());
    }
    ++pos_;
    if (children.size() < 2)
      throw ArityError("relation '" + label + "' has fewer than two children", start);
    if (tag.size() != children.size())
      throw SyntaxError("nuclearity tag '" + tag + "' does not match arity " + std::to_string(children.size()),
                        tag_start);
    if (tag.find('N') == std::string::npos) throw SyntaxError("nuclearity tag has no nucleus", tag_start);
    return RstNode::internal(std::move(label), std::move(tag), std::move(children));
  }

  void skip_ws() {
    while (pos_ < in_.size() && is_ws(in_[pos_])) ++pos_;
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

void serialize_node(const RstNode& node, std::string& out) {
  if (node.is_leaf()) {
    out.push_back('[');
    for (char c : node.text) {
      if (c == '[' || c == ']' || c == '\\') out.push_back('\\');
      out.push_back(c);
    }
    out.push_back(']');
    return;
  }
  out.push_back('(');
  out += node.relation;
  out.push_back('[');
  out += node.nuclearity;
  out.push_back(']');
  for (const auto& child : node.children) {
    out.push_back(' ');
    serialize_node(child, out);
  }
  out.push_back(')');
}

}  // namespace

RstNode RstNode::leaf(std::string text) {
  RstNode n;
  n.text = std::move(text);
  return n;
}

RstNode RstNode::internal(std::string relation, std::string nuclearity, std::vector<RstNode> children) {
  RstNode n;
  n.relation = std::move(relation);
  n.nuclearity = std::move(nuclearity);
  n.children = std::move(children);
  return n;
}

RstTree::RstTree(RstNode root) : root_(std::move(root)) { validate_node(root_, 0); }

RstTree parse_rst_tree(std::string_view text) { return Parser(text).run(); }

std::string serialize_rst_tree(const RstTree& tree) {
  std::string out;
  serialize_node(tree.root(), out);
  return out;
}

void for_each_node(const RstTree& tree, const std::function<void(const NodeVisit&)>& fn) {
  struct Frame {
    const RstNode* node;
    std::size_t depth;
    std::size_t yngve;
  };
  std::vector<Frame> stack{{&tree.root(), 0, 0}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    fn(NodeVisit{*f.node, f.depth, f.yngve});
    const auto& kids = f.node->children;
    const std::size_t k = kids.size();
    for (std::size_t i = k; i-- > 0;) stack.push_back({&kids[i], f.depth + 1, f.yngve + (k - 1 - i)});
  }
}

NodeCounts count_nodes(const RstTree& tree) {
  NodeCounts counts;
  for_each_node(tree, [&](const NodeVisit& v) { ++(v.node.is_leaf() ? counts.leaves : counts.internal); });
  return counts;
}

std::vector<std::string> edu_texts(const RstTree& tree) {
  std::vector<std::string> out;
  for_each_node(tree, [&](const NodeVisit& v) {
    if (v.node.is_leaf()) out.push_back(v.node.text);
  });
  return out;
}

RstTree read_rst_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open tree file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_rst_tree(buf.str());
}

}  // namespace rhetprobe
