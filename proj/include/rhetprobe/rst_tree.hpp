#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace rhetprobe {

// A node of an RST discourse tree. Leaves carry EDU text and no children;
// internal nodes carry a relation label, a nuclearity tag with one N/S
// character per child, and two or more ordered children.
struct RstNode {
  std::string relation;
  std::string nuclearity;
  std::string text;
  std::vector<RstNode> children;

  bool is_leaf() const noexcept { return children.empty(); }

  static RstNode leaf(std::string text);
  static RstNode internal(std::string relation, std::string nuclearity, std::vector<RstNode> children);

  friend bool operator==(const RstNode&, const RstNode&) = default;
};

// Immutable, validated discourse tree.
class RstTree {
 public:
  // Throws SyntaxError / ArityError when root violates the tree invariants.
  explicit RstTree(RstNode root);

  const RstNode& root() const noexcept { return root_; }

  friend bool operator==(const RstTree&, const RstTree&) = default;

 private:
  RstNode root_;
};

struct NodeCounts {
  std::size_t internal = 0;
  std::size_t leaves = 0;
  friend bool operator==(const NodeCounts&, const NodeCounts&) = default;
};

// Per-node position information handed to traversal callbacks.
struct NodeVisit {
  const RstNode& node;
  std::size_t depth;  // root = 0
  std::size_t yngve;  // sum over the root path of right siblings of each child taken
};

RstTree parse_rst_tree(std::string_view text);
std::string serialize_rst_tree(const RstTree& tree);
NodeCounts count_nodes(const RstTree& tree);

// Pre-order, left-to-right. Deterministic and non-recursive.
void for_each_node(const RstTree& tree, const std::function<void(const NodeVisit&)>& fn);

// EDU texts in leaf order.
std::vector<std::string> edu_texts(const RstTree& tree);

RstTree read_rst_file(const std::string& path);

}  // namespace rhetprobe
