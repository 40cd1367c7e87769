#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace deam {

// Constant attribute value: a quoted string, a numeral, or the bare `-`
// marker used for negation (`:polarity -`).
struct Constant {
  enum class Kind { text, number, minus };
  Kind kind = Kind::text;
  std::string value;  // payload without quotes; "-" for minus

  static Constant text_value(std::string v) { return {Kind::text, std::move(v)}; }
  static Constant number(std::string v) { return {Kind::number, std::move(v)}; }
  static Constant minus() { return {Kind::minus, "-"}; }

  friend bool operator==(const Constant&, const Constant&) = default;
};

struct AmrNode {
  std::string var;
  std::string concept_label;
  friend bool operator==(const AmrNode&, const AmrNode&) = default;
};

struct AmrEdge {
  std::string source;
  std::string role;  // includes the leading ':'
  std::string target;
  friend bool operator==(const AmrEdge&, const AmrEdge&) = default;
};

struct AmrAttribute {
  std::string source;
  std::string role;
  Constant value;
  friend bool operator==(const AmrAttribute&, const AmrAttribute&) = default;
};

// Rooted, directed, acyclic semantic graph. Node, edge and attribute order
// is part of the value: serialization emits children in stored order, and
// all edit operations keep order deterministic. Values are treated as
// immutable; operations return new graphs.
struct AmrGraph {
  std::string root;
  std::vector<AmrNode> nodes;       // declaration order; vars unique
  std::vector<AmrEdge> edges;       // global order; per-source order = child order
  std::vector<AmrAttribute> attributes;

  bool has_var(std::string_view var) const;
  // Concept for a declared variable, or nullptr.
  const std::string* concept_of(std::string_view var) const;
  std::size_t node_count() const { return nodes.size(); }

  friend bool operator==(const AmrGraph&, const AmrGraph&) = default;
};

struct Violation {
  std::string code;     // stable identifier, e.g. "UNDECLARED_TARGET"
  std::string subject;  // offending variable or token
  std::string message;
};

struct ValidationReport {
  bool ok = true;
  std::vector<Violation> violations;
};

class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& what, std::size_t offset)
      : std::runtime_error(what), offset_(offset) {}
  // Byte offset into the input where the problem was detected.
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

enum class PenmanStyle { multiline, single_line };

// Parse one parenthesized PENMAN expression. The result satisfies all
// graph invariants; malformed input throws parse_error.
AmrGraph parse(std::string_view penman);

// Deterministic PENMAN text. Children appear in stored edge order,
// attributes before edges; reentrant nodes are declared at their first
// traversal occurrence and printed bare afterwards. Throws
// std::invalid_argument if the graph fails validation.
std::string serialize(const AmrGraph& graph, PenmanStyle style = PenmanStyle::multiline);

// Check every structural invariant; violations are data, not errors.
ValidationReport validate(const AmrGraph& graph);

// Longest root-to-node path counted in edges (attributes excluded).
int depth(const AmrGraph& graph);

// Longest root-to-node distance for every reachable node; reentrant nodes
// take the deepest incoming path. Throws std::invalid_argument on cycles.
std::map<std::string, int> node_depths(const AmrGraph& graph);

// Closed set of node predicates used by the manipulations.
class NodePredicate {
 public:
  static NodePredicate concept_in(std::set<std::string> concepts);
  static NodePredicate incoming_role(std::string prefix);  // ":ARG", ":op", ":snt"
  static NodePredicate concept_equals(std::string concept_label);
  static NodePredicate pronoun(std::vector<std::string> inventory);

  bool matches(const AmrGraph& graph, const std::string& var) const;

 private:
  enum class Kind { concept_in, incoming_role, concept_equals, pronoun };
  Kind kind_;
  std::set<std::string> concepts_;
  std::string token_;
  NodePredicate(Kind kind) : kind_(kind) {}
};

// Matching variables in deterministic traversal order (depth-first,
// stored edge order, first visit).
std::vector<std::string> find_nodes(const AmrGraph& graph, const NodePredicate& predicate);

// Nodes in serialization traversal order.
std::vector<std::string> traversal_order(const AmrGraph& graph);

// Self-contained copy of the subgraph reachable from `at`, all variables
// renamed fresh with respect to the source graph.
AmrGraph clone_subgraph(const AmrGraph& graph, std::string_view at);

// Drop the primary edge into `at` (the first stored edge targeting it) and
// every node that becomes unreachable. Reentrantly referenced nodes
// survive and keep their declarations. `:sntK` children of a
// multi-sentence parent are renumbered consecutively from 1.
AmrGraph remove_subtree(const AmrGraph& graph, std::string_view at);

// Same removal semantics for one specific edge.
AmrGraph remove_edge_subtree(const AmrGraph& graph, const AmrEdge& edge);

// Attach `sentence` as the next `:sntK` child of a multi-sentence root,
// wrapping single-sentence graphs in a fresh multi-sentence root first.
// Inserted variables are renamed to avoid collisions.
AmrGraph insert_sentence_subgraph(const AmrGraph& graph, const AmrGraph& sentence);

// Rename-invariant comparison key: variables are renumbered in traversal
// order and the result serialized single-line. Two graphs are structurally
// identical up to variable naming iff their canonical forms are equal.
std::string canonical_form(const AmrGraph& graph);

// Smallest unused variable for a concept: base letter, then base2, base3...
// Appends the chosen name to `used`.
std::string fresh_variable(std::string_view concept_label, std::set<std::string>& used);

// PropBank-style predicate shape `lemma-NN`.
bool is_predicate_concept(std::string_view concept_label);

// Split `like-01` into ("like", "-01"); concepts without a sense suffix
// return an empty suffix.
std::pair<std::string, std::string> split_sense_suffix(std::string_view concept_label);

// True for role names matching the `:name` pattern.
bool is_valid_role(std::string_view role);

// True for sentence roles `:sntK` with K rendered in decimal digits.
bool is_snt_role(std::string_view role);

// Numeric index of a `:sntK` role. Pre: is_snt_role(role).
int snt_role_index(std::string_view role);

}  // namespace deam
