#include "deam/amr.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <utility>

namespace deam {

bool is_snt_role(std::string_view role) {
  if (role.size() <= 4 || role.substr(0, 4) != ":snt") return false;
  return std::all_of(role.begin() + 4, role.end(),
                     [](unsigned char c) { return std::isdigit(c); });
}

int snt_role_index(std::string_view role) {
  int k = 0;
  for (char c : role.substr(4)) k = k * 10 + (c - '0');
  return k;
}

namespace {

// var -> indices into graph.edges, preserving stored order.
std::map<std::string, std::vector<std::size_t>> out_edge_index(const AmrGraph& g) {
  std::map<std::string, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < g.edges.size(); ++i) out[g.edges[i].source].push_back(i);
  return out;
}

// First-visit DFS order over stored out-edges, starting at `from`.
std::vector<std::string> reach_order(const AmrGraph& g, const std::string& from) {
  auto out = out_edge_index(g);
  std::vector<std::string> order;
  std::set<std::string> seen;
  // Explicit stack of (var, next-edge cursor) to keep the exact
  // serialization visit order without recursion depth limits.
  std::vector<std::pair<std::string, std::size_t>> stack;
  if (g.has_var(from)) {
    seen.insert(from);
    order.push_back(from);
    stack.emplace_back(from, 0);
  }
  while (!stack.empty()) {
    auto& [var, cursor] = stack.back();
    const auto it = out.find(var);
    if (it == out.end() || cursor >= it->second.size()) {
      stack.pop_back();
      continue;
    }
    const AmrEdge& e = g.edges[it->second[cursor++]];
    if (g.has_var(e.target) && seen.insert(e.target).second) {
      order.push_back(e.target);
      stack.emplace_back(e.target, 0);
    }
  }
  return order;
}

bool has_cycle(const AmrGraph& g) {
  // Colors: 0 unvisited, 1 on stack, 2 done.
  std::map<std::string, int> color;
  auto out = out_edge_index(g);
  for (const auto& n : g.nodes) {
    if (color[n.var] != 0) continue;
    std::vector<std::pair<std::string, std::size_t>> stack{{n.var, 0}};
    color[n.var] = 1;
    while (!stack.empty()) {
      auto& [var, cursor] = stack.back();
      const auto it = out.find(var);
      if (it == out.end() || cursor >= it->second.size()) {
        color[var] = 2;
        stack.pop_back();
        continue;
      }
      const std::string& next = g.edges[it->second[cursor++]].target;
      const auto cit = color.find(next);
      const int c = cit == color.end() ? 0 : cit->second;
      if (c == 1) return true;
      if (c == 0) {
        color[next] = 1;
        stack.emplace_back(next, 0);
      }
    }
  }
  return false;
}

void check_valid(const AmrGraph& g, const char* op) {
  const ValidationReport report = validate(g);
  if (!report.ok) {
    throw std::invalid_argument(std::string(op) + ": invalid graph (" +
                                report.violations.front().code + ": " +
                                report.violations.front().message + ")");
  }
}

}  // namespace

bool AmrGraph::has_var(std::string_view var) const {
  return concept_of(var) != nullptr;
}

const std::string* AmrGraph::concept_of(std::string_view var) const {
  for (const auto& n : nodes) {
    if (n.var == var) return &n.concept_label;
  }
  return nullptr;
}

bool is_valid_role(std::string_view role) {
  if (role.size() < 2 || role[0] != ':') return false;
  if (!std::isalnum(static_cast<unsigned char>(role[1]))) return false;
  return std::all_of(role.begin() + 1, role.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-';
  });
}

bool is_predicate_concept(std::string_view concept_label) {
  const std::size_t n = concept_label.size();
  if (n < 4) return false;
  return concept_label[n - 3] == '-' &&
         std::isdigit(static_cast<unsigned char>(concept_label[n - 2])) &&
         std::isdigit(static_cast<unsigned char>(concept_label[n - 1]));
}

std::pair<std::string, std::string> split_sense_suffix(std::string_view concept_label) {
  if (!is_predicate_concept(concept_label)) return {std::string(concept_label), ""};
  const std::size_t cut = concept_label.size() - 3;
  return {std::string(concept_label.substr(0, cut)), std::string(concept_label.substr(cut))};
}

std::string fresh_variable(std::string_view concept_label, std::set<std::string>& used) {
  char base = 'x';
  for (char c : concept_label) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      base = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      break;
    }
  }
  std::string candidate(1, base);
  for (int k = 2; used.count(candidate) != 0; ++k) {
    candidate = std::string(1, base) + std::to_string(k);
  }
  used.insert(candidate);
  return candidate;
}

ValidationReport validate(const AmrGraph& g) {
  ValidationReport report;
  auto add = [&report](std::string code, std::string subject, std::string message) {
    report.violations.push_back({std::move(code), std::move(subject), std::move(message)});
  };

  std::set<std::string> declared;
  for (const auto& n : g.nodes) {
    if (!declared.insert(n.var).second) {
      add("DUPLICATE_VARIABLE", n.var, "variable declared more than once");
    }
  }
  if (declared.count(g.root) == 0) {
    add("ROOT_UNDECLARED", g.root, "root is not a declared variable");
  }
  for (const auto& e : g.edges) {
    if (declared.count(e.source) == 0) {
      add("UNDECLARED_SOURCE", e.source, "edge source is not declared");
    }
    if (declared.count(e.target) == 0) {
      add("UNDECLARED_TARGET", e.target, "edge target is not declared");
    }
    if (!is_valid_role(e.role)) add("BAD_ROLE", e.role, "role does not match :name");
  }
  for (const auto& a : g.attributes) {
    if (declared.count(a.source) == 0) {
      add("UNDECLARED_SOURCE", a.source, "attribute source is not declared");
    }
    if (!is_valid_role(a.role)) add("BAD_ROLE", a.role, "role does not match :name");
    if (a.value.kind == Constant::Kind::minus && a.value.value != "-") {
      add("BAD_CONSTANT", a.value.value, "minus marker must be exactly '-'");
    }
  }

  if (declared.count(g.root) != 0) {
    const auto reach = reach_order(g, g.root);
    const std::set<std::string> reached(reach.begin(), reach.end());
    for (const auto& n : g.nodes) {
      if (reached.count(n.var) == 0) {
        add("UNREACHABLE", n.var, "node is not reachable from the root");
      }
    }
  }
  if (has_cycle(g)) {
    add("CYCLE", g.root, "edge relation contains a cycle");
  }

  report.ok = report.violations.empty();
  return report;
}

std::map<std::string, int> node_depths(const AmrGraph& g) {
  if (has_cycle(g)) throw std::invalid_argument("node_depths: graph contains a cycle");
  const auto order = reach_order(g, g.root);
  std::map<std::string, int> indegree;
  for (const auto& v : order) indegree[v] = 0;
  for (const auto& e : g.edges) {
    if (indegree.count(e.source) != 0 && indegree.count(e.target) != 0) {
      ++indegree[e.target];
    }
  }
  std::map<std::string, int> dist;
  if (order.empty()) return dist;
  std::vector<std::string> queue{g.root};
  dist[g.root] = 0;
  auto out = out_edge_index(g);
  while (!queue.empty()) {
    const std::string var = queue.back();
    queue.pop_back();
    const auto it = out.find(var);
    if (it == out.end()) continue;
    for (std::size_t ei : it->second) {
      const AmrEdge& e = g.edges[ei];
      if (indegree.count(e.target) == 0) continue;
      dist[e.target] = std::max(dist[e.target], dist[var] + 1);
      if (--indegree[e.target] == 0) queue.push_back(e.target);
    }
  }
  return dist;
}

int depth(const AmrGraph& g) {
  int best = 0;
  for (const auto& [var, d] : node_depths(g)) best = std::max(best, d);
  return best;
}

NodePredicate NodePredicate::concept_in(std::set<std::string> concepts) {
  NodePredicate p(Kind::concept_in);
  p.concepts_ = std::move(concepts);
  return p;
}

NodePredicate NodePredicate::incoming_role(std::string prefix) {
  NodePredicate p(Kind::incoming_role);
  p.token_ = std::move(prefix);
  return p;
}

NodePredicate NodePredicate::concept_equals(std::string concept_label) {
  NodePredicate p(Kind::concept_equals);
  p.token_ = std::move(concept_label);
  return p;
}

NodePredicate NodePredicate::pronoun(std::vector<std::string> inventory) {
  NodePredicate p(Kind::pronoun);
  p.concepts_ = std::set<std::string>(inventory.begin(), inventory.end());
  return p;
}

bool NodePredicate::matches(const AmrGraph& g, const std::string& var) const {
  const std::string* c = g.concept_of(var);
  if (c == nullptr) return false;
  switch (kind_) {
    case Kind::concept_in:
    case Kind::pronoun:
      return concepts_.count(*c) != 0;
    case Kind::concept_equals:
      return *c == token_;
    case Kind::incoming_role:
      return std::any_of(g.edges.begin(), g.edges.end(), [&](const AmrEdge& e) {
        return e.target == var && e.role.compare(0, token_.size(), token_) == 0;
      });
  }
  return false;
}

std::vector<std::string> find_nodes(const AmrGraph& g, const NodePredicate& predicate) {
  std::vector<std::string> hits;
  for (const auto& var : reach_order(g, g.root)) {
    if (predicate.matches(g, var)) hits.push_back(var);
  }
  return hits;
}

std::vector<std::string> traversal_order(const AmrGraph& g) {
  return reach_order(g, g.root);
}

AmrGraph clone_subgraph(const AmrGraph& g, std::string_view at) {
  const std::string* c = g.concept_of(at);
  if (c == nullptr) {
    throw std::invalid_argument("clone_subgraph: undeclared variable " + std::string(at));
  }
  const auto order = reach_order(g, std::string(at));
  const std::set<std::string> member(order.begin(), order.end());

  std::set<std::string> used;
  for (const auto& n : g.nodes) used.insert(n.var);

  std::map<std::string, std::string> renamed;
  AmrGraph out;
  for (const auto& var : order) {
    renamed[var] = fresh_variable(*g.concept_of(var), used);
    out.nodes.push_back({renamed[var], *g.concept_of(var)});
  }
  out.root = renamed.at(std::string(at));
  for (const auto& e : g.edges) {
    if (member.count(e.source) != 0) {
      out.edges.push_back({renamed.at(e.source), e.role, renamed.at(e.target)});
    }
  }
  for (const auto& a : g.attributes) {
    if (member.count(a.source) != 0) out.attributes.push_back({renamed.at(a.source), a.role, a.value});
  }
  return out;
}

AmrGraph remove_edge_subtree(const AmrGraph& g, const AmrEdge& edge) {
  const auto it = std::find(g.edges.begin(), g.edges.end(), edge);
  if (it == g.edges.end()) {
    throw std::invalid_argument("remove_edge_subtree: no such edge " + edge.source + " " +
                                edge.role + " " + edge.target);
  }
  AmrGraph pruned = g;
  pruned.edges.erase(pruned.edges.begin() + (it - g.edges.begin()));

  const auto reach = reach_order(pruned, pruned.root);
  const std::set<std::string> alive(reach.begin(), reach.end());

  AmrGraph out;
  out.root = pruned.root;
  for (const auto& n : pruned.nodes) {
    if (alive.count(n.var) != 0) out.nodes.push_back(n);
  }
  for (const auto& e : pruned.edges) {
    if (alive.count(e.source) != 0) out.edges.push_back(e);
  }
  for (const auto& a : pruned.attributes) {
    if (alive.count(a.source) != 0) out.attributes.push_back(a);
  }

  // Removing a :sntK child of a multi-sentence node renumbers the survivors.
  const std::string* parent_concept = g.concept_of(edge.source);
  if (parent_concept != nullptr && *parent_concept == "multi-sentence" && is_snt_role(edge.role)) {
    int next = 1;
    for (auto& e : out.edges) {
      if (e.source == edge.source && is_snt_role(e.role)) {
        e.role = ":snt" + std::to_string(next++);
      }
    }
  }
  return out;
}

AmrGraph remove_subtree(const AmrGraph& g, std::string_view at) {
  if (!g.has_var(at)) {
    throw std::invalid_argument("remove_subtree: undeclared variable " + std::string(at));
  }
  if (at == g.root) {
    throw std::invalid_argument("remove_subtree: cannot remove the root");
  }
  const auto it = std::find_if(g.edges.begin(), g.edges.end(),
                               [&](const AmrEdge& e) { return e.target == at; });
  if (it == g.edges.end()) {
    throw std::invalid_argument("remove_subtree: node has no incoming edge: " + std::string(at));
  }
  return remove_edge_subtree(g, *it);
}

AmrGraph insert_sentence_subgraph(const AmrGraph& g, const AmrGraph& sentence) {
  check_valid(g, "insert_sentence_subgraph");
  check_valid(sentence, "insert_sentence_subgraph");

  std::set<std::string> used;
  for (const auto& n : g.nodes) used.insert(n.var);

  AmrGraph host;
  const std::string* root_concept = g.concept_of(g.root);
  if (root_concept != nullptr && *root_concept == "multi-sentence") {
    host = g;
  } else {
    const std::string wrapper = fresh_variable("multi-sentence", used);
    host.root = wrapper;
    host.nodes.push_back({wrapper, "multi-sentence"});
    host.nodes.insert(host.nodes.end(), g.nodes.begin(), g.nodes.end());
    host.edges.push_back({wrapper, ":snt1", g.root});
    host.edges.insert(host.edges.end(), g.edges.begin(), g.edges.end());
    host.attributes = g.attributes;
  }

  int next = 1;
  for (const auto& e : host.edges) {
    if (e.source == host.root && is_snt_role(e.role)) {
      next = std::max(next, snt_role_index(e.role) + 1);
    }
  }

  std::map<std::string, std::string> renamed;
  for (const auto& var : reach_order(sentence, sentence.root)) {
    renamed[var] = fresh_variable(*sentence.concept_of(var), used);
    host.nodes.push_back({renamed[var], *sentence.concept_of(var)});
  }
  host.edges.push_back({host.root, ":snt" + std::to_string(next), renamed.at(sentence.root)});
  for (const auto& e : sentence.edges) {
    host.edges.push_back({renamed.at(e.source), e.role, renamed.at(e.target)});
  }
  for (const auto& a : sentence.attributes) {
    host.attributes.push_back({renamed.at(a.source), a.role, a.value});
  }
  return host;
}

std::string canonical_form(const AmrGraph& g) {
  check_valid(g, "canonical_form");
  const auto order = reach_order(g, g.root);
  std::map<std::string, std::string> renamed;
  AmrGraph canon;
  for (std::size_t i = 0; i < order.size(); ++i) {
    renamed[order[i]] = "n" + std::to_string(i + 1);
    canon.nodes.push_back({renamed[order[i]], *g.concept_of(order[i])});
  }
  canon.root = renamed.at(g.root);
  for (const auto& e : g.edges) {
    canon.edges.push_back({renamed.at(e.source), e.role, renamed.at(e.target)});
  }
  for (const auto& a : g.attributes) {
    canon.attributes.push_back({renamed.at(a.source), a.role, a.value});
  }
  return serialize(canon, PenmanStyle::single_line);
}

}  // namespace deam
