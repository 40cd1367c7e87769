#include "deam/amr.hpp"

#include <cctype>
#include <map>
#include <sstream>
#include <vector>

namespace deam {

namespace {

bool is_atom_end(char c) {
  return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '"' ||
         c == '/' || c == ':';
}

bool is_number_token(std::string_view token) {
  std::size_t i = 0;
  if (i < token.size() && (token[i] == '+' || token[i] == '-')) ++i;
  std::size_t digits = 0;
  while (i < token.size() && std::isdigit(static_cast<unsigned char>(token[i]))) ++i, ++digits;
  if (digits == 0) return false;
  if (i == token.size()) return true;
  if (token[i] != '.') return false;
  ++i;
  digits = 0;
  while (i < token.size() && std::isdigit(static_cast<unsigned char>(token[i]))) ++i, ++digits;
  return digits > 0 && i == token.size();
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  AmrGraph run() {
    skip_ws();
    graph_.root = parse_node();
    skip_ws();
    if (pos_ != text_.size()) {
      throw parse_error("trailing content after graph", pos_);
    }
    for (const auto& [edge_index, offset] : references_) {
      if (!graph_.has_var(graph_.edges[edge_index].target)) {
        throw parse_error("reference to undeclared variable: " + graph_.edges[edge_index].target,
                          offset);
      }
    }
    const ValidationReport report = validate(graph_);
    if (!report.ok) {
      // Structural errors the grammar alone cannot rule out, e.g. cycles
      // built from reentrant references.
      const Violation& v = report.violations.front();
      throw parse_error(v.code + ": " + v.message + " (" + v.subject + ")", pos_);
    }
    return graph_;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void expect(char c, const char* what) {
    if (peek() != c) {
      throw parse_error(std::string("expected ") + what, pos_);
    }
    ++pos_;
  }

  std::string atom(const char* what) {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_atom_end(text_[pos_])) ++pos_;
    if (pos_ == start) {
      throw parse_error(std::string("expected ") + what, pos_);
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string quoted_string() {
    expect('"', "opening quote");
    std::string value;
    while (true) {
      if (pos_ >= text_.size()) {
        throw parse_error("unterminated string constant", pos_);
      }
      const char c = text_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (pos_ >= text_.size()) {
          throw parse_error("unterminated escape in string constant", pos_);
        }
        const char esc = text_[pos_++];
        if (esc != '"' && esc != '\\') {
          throw parse_error("unsupported escape in string constant", pos_ - 1);
        }
        value.push_back(esc);
      } else {
        value.push_back(c);
      }
    }
    return value;
  }

  std::string parse_node() {
    expect('(', "'('");
    skip_ws();
    const std::size_t var_offset = pos_;
    const std::string var = atom("variable name");
    if (!declared_.insert(var).second) {
      throw parse_error("duplicate variable declaration: " + var, var_offset);
    }
    skip_ws();
    expect('/', "'/' after variable");
    skip_ws();
    const std::string concept_label = atom("concept after '/'");
    graph_.nodes.push_back({var, concept_label});

    while (true) {
      skip_ws();
      if (peek() == ')') {
        ++pos_;
        return var;
      }
      if (peek() != ':') {
        throw parse_error("expected role or ')'", pos_);
      }
      const std::size_t role_offset = pos_;
      ++pos_;
      const std::string role = ":" + atom("role name");
      if (!is_valid_role(role)) {
        throw parse_error("invalid role: " + role, role_offset);
      }
      skip_ws();
      if (peek() == '(') {
        // Keep text order: record the edge before descending into the child.
        const std::size_t edge_index = graph_.edges.size();
        graph_.edges.push_back({var, role, ""});
        graph_.edges[edge_index].target = parse_node();
      } else if (peek() == '"') {
        graph_.attributes.push_back({var, role, Constant::text_value(quoted_string())});
      } else {
        const std::size_t value_offset = pos_;
        const std::string token = atom("role value");
        if (token == "-") {
          graph_.attributes.push_back({var, role, Constant::minus()});
        } else if (is_number_token(token)) {
          graph_.attributes.push_back({var, role, Constant::number(token)});
        } else {
          references_.emplace_back(graph_.edges.size(), value_offset);
          graph_.edges.push_back({var, role, token});
        }
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  AmrGraph graph_;
  std::set<std::string> declared_;
  std::vector<std::pair<std::size_t, std::size_t>> references_;
};

std::string constant_text(const Constant& c) {
  switch (c.kind) {
    case Constant::Kind::minus:
      return "-";
    case Constant::Kind::number:
      return c.value;
    case Constant::Kind::text:
      break;
  }
  std::string out = "\"";
  for (char ch : c.value) {
    if (ch == '"' || ch == '\\') out.push_back('\\');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

class Writer {
 public:
  Writer(const AmrGraph& g, PenmanStyle style) : graph_(g), style_(style) {
    for (std::size_t i = 0; i < g.edges.size(); ++i) edges_of_[g.edges[i].source].push_back(i);
    for (std::size_t i = 0; i < g.attributes.size(); ++i) {
      attributes_of_[g.attributes[i].source].push_back(i);
    }
  }

  std::string run() {
    declared_.insert(graph_.root);
    emit(graph_.root, 0);
    return out_.str();
  }

 private:
  void separator(int depth) {
    if (style_ == PenmanStyle::single_line) {
      out_ << ' ';
    } else {
      out_ << '\n' << std::string(static_cast<std::size_t>(6) * (depth + 1), ' ');
    }
  }

  void emit(const std::string& var, int depth) {
    out_ << '(' << var << " / " << *graph_.concept_of(var);
    if (const auto it = attributes_of_.find(var); it != attributes_of_.end()) {
      for (std::size_t ai : it->second) {
        const AmrAttribute& a = graph_.attributes[ai];
        separator(depth);
        out_ << a.role << ' ' << constant_text(a.value);
      }
    }
    if (const auto it = edges_of_.find(var); it != edges_of_.end()) {
      for (std::size_t ei : it->second) {
        const AmrEdge& e = graph_.edges[ei];
        separator(depth);
        out_ << e.role << ' ';
        if (declared_.insert(e.target).second) {
          emit(e.target, depth + 1);
        } else {
          out_ << e.target;
        }
      }
    }
    out_ << ')';
  }

  const AmrGraph& graph_;
  PenmanStyle style_;
  std::map<std::string, std::vector<std::size_t>> edges_of_;
  std::map<std::string, std::vector<std::size_t>> attributes_of_;
  std::set<std::string> declared_;
  std::ostringstream out_;
};

}  // namespace

AmrGraph parse(std::string_view text) { return Parser(text).run(); }

std::string serialize(const AmrGraph& graph, PenmanStyle style) {
  const ValidationReport report = validate(graph);
  if (!report.ok) {
    throw std::invalid_argument("serialize: invalid graph (" + report.violations.front().code +
                                ": " + report.violations.front().message + ")");
  }
  return Writer(graph, style).run();
}

}  // namespace deam
