#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"

#include "deam/amr.hpp"
#include "support/fixtures.hpp"

using namespace deam;

namespace {

AmrGraph fixture_graph() { return parse(fixtures::kOriginalPenman[3]); }

bool has_violation(const ValidationReport& report, const std::string& code) {
  return std::any_of(report.violations.begin(), report.violations.end(),
                     [&](const Violation& v) { return v.code == code; });
}

}  // namespace

TEST_CASE("parse: four-node concession graph") {
  const AmrGraph g = fixture_graph();
  CHECK(g.root == "h");
  CHECK(g.nodes.size() == 4);
  CHECK(g.edges.size() == 3);
  CHECK(g.attributes.empty());
  CHECK(*g.concept_of("h") == "have-concession-91");
  CHECK(*g.concept_of("o") == "orange");
  CHECK(*g.concept_of("h2") == "he");
  CHECK(*g.concept_of("o2") == "once");
  CHECK(g.edges[0] == AmrEdge{"h", ":ARG1", "o"});
  CHECK(g.edges[1] == AmrEdge{"o", ":domain", "h2"});
  CHECK(g.edges[2] == AmrEdge{"o", ":time", "o2"});
}

TEST_CASE("parse: minimal graph") {
  const AmrGraph g = parse("(i / i)");
  CHECK(g.root == "i");
  CHECK(g.nodes.size() == 1);
  CHECK(g.edges.empty());
  CHECK(g.attributes.empty());
}

TEST_CASE("parse: reentrant reference is an edge, not a re-declaration") {
  const AmrGraph g = parse("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))");
  CHECK(g.nodes.size() == 3);
  REQUIRE(g.edges.size() == 3);
  CHECK(g.edges[2] == AmrEdge{"g", ":ARG0", "b"});
  CHECK(validate(g).ok);
}

TEST_CASE("serialize: deterministic golden forms") {
  CHECK(serialize(parse("(i / i)"), PenmanStyle::single_line) == "(i / i)");
  const std::string reentrant = "(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))";
  CHECK(serialize(parse(reentrant), PenmanStyle::single_line) == reentrant);
  // Multiline output indents six spaces per depth and reproduces every
  // fixture graph byte for byte.
  for (const std::string& penman : fixtures::all_fixture_penman()) {
    CHECK(serialize(parse(penman), PenmanStyle::multiline) == penman);
  }
}

TEST_CASE("validate: well-formed fixture is clean") {
  const ValidationReport report = validate(fixture_graph());
  CHECK(report.ok);
  CHECK(report.violations.empty());
}

TEST_CASE("validate: every violation code fires") {
  AmrGraph g = fixture_graph();
  SUBCASE("UNDECLARED_TARGET") {
    g.edges.push_back({"h", ":mod", "ghost"});
    const auto report = validate(g);
    CHECK_FALSE(report.ok);
    CHECK(has_violation(report, "UNDECLARED_TARGET"));
  }
  SUBCASE("UNDECLARED_SOURCE") {
    g.edges.push_back({"ghost", ":mod", "h2"});
    CHECK(has_violation(validate(g), "UNDECLARED_SOURCE"));
  }
  SUBCASE("CYCLE") {
    AmrGraph two;
    two.root = "a";
    two.nodes = {{"a", "alpha"}, {"b", "beta"}};
    two.edges = {{"a", ":ARG0", "b"}, {"b", ":ARG0", "a"}};
    CHECK(has_violation(validate(two), "CYCLE"));
  }
  SUBCASE("DUPLICATE_VARIABLE") {
    g.nodes.push_back({"h2", "extra"});
    CHECK(has_violation(validate(g), "DUPLICATE_VARIABLE"));
  }
  SUBCASE("ROOT_UNDECLARED") {
    g.root = "zz";
    CHECK(has_violation(validate(g), "ROOT_UNDECLARED"));
  }
  SUBCASE("UNREACHABLE") {
    g.nodes.push_back({"x9", "island"});
    CHECK(has_violation(validate(g), "UNREACHABLE"));
  }
  SUBCASE("BAD_ROLE") {
    g.edges.push_back({"h", "mod", "h2"});
    CHECK(has_violation(validate(g), "BAD_ROLE"));
  }
  SUBCASE("BAD_CONSTANT") {
    g.attributes.push_back({"h", ":polarity", Constant{Constant::Kind::minus, "--"}});
    CHECK(has_violation(validate(g), "BAD_CONSTANT"));
  }
}

TEST_CASE("depth") {
  CHECK(depth(parse("(i / i)")) == 0);
  CHECK(depth(fixture_graph()) == 2);
  CHECK(depth(parse(fixtures::kOriginalPenman[0])) == 2);  // watch-01 chain w -> b -> n
  // On reentrancy the longest incoming path wins: c sits at depth 2 via b
  // even though the direct a -> c edge would give it depth 1.
  const AmrGraph diamond =
      parse("(a / alpha :ARG0 (b / beta :ARG1 (c / gamma)) :ARG2 c)");
  CHECK(depth(diamond) == 2);
  const auto depths = node_depths(diamond);
  CHECK(depths.at("a") == 0);
  CHECK(depths.at("b") == 1);
  CHECK(depths.at("c") == 2);
}

TEST_CASE("find_nodes") {
  const AmrGraph watch = parse(fixtures::kOriginalPenman[0]);
  CHECK(find_nodes(watch, NodePredicate::concept_equals("amr-unknown")) ==
        std::vector<std::string>{"a"});

  // Pronoun scan over the third utterance: two `he` and two `i` instances,
  // in depth-first edge order.
  const AmrGraph third = parse(fixtures::kOriginalPenman[2]);
  const auto hits = find_nodes(third, NodePredicate::pronoun({"i", "he"}));
  CHECK(hits == std::vector<std::string>{"h", "ii2", "h3", "ii3"});
  CHECK(find_nodes(third, NodePredicate::pronoun({"i", "he"})) == hits);  // deterministic

  CHECK(find_nodes(parse("(i / i)"), NodePredicate::concept_in({"x"})).empty());

  const auto arg_targets = find_nodes(fixture_graph(), NodePredicate::incoming_role(":ARG"));
  CHECK(arg_targets == std::vector<std::string>{"o"});
}

TEST_CASE("clone_subgraph") {
  const AmrGraph g = fixture_graph();
  SUBCASE("inner subtree") {
    const AmrGraph c = clone_subgraph(g, "o");
    CHECK(c.nodes.size() == 3);
    CHECK(c.edges.size() == 2);
    CHECK(*c.concept_of(c.root) == "orange");
    CHECK(validate(c).ok);
  }
  SUBCASE("clone at root is a full disjoint copy") {
    const AmrGraph c = clone_subgraph(g, "h");
    CHECK(c.nodes.size() == g.nodes.size());
    CHECK(canonical_form(c) == canonical_form(g));
    for (const auto& n : c.nodes) CHECK_FALSE(g.has_var(n.var));
  }
  SUBCASE("clone at leaf") {
    const AmrGraph c = clone_subgraph(g, "o2");
    CHECK(c.nodes.size() == 1);
    CHECK(*c.concept_of(c.root) == "once");
  }
  SUBCASE("reentrant target outside the subtree is copied as a declaration") {
    const AmrGraph want = parse("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))");
    const AmrGraph c = clone_subgraph(want, "g");
    CHECK(c.nodes.size() == 2);
    CHECK(c.edges.size() == 1);
    CHECK(validate(c).ok);
    CHECK(canonical_form(c) == canonical_form(parse("(g / go-02 :ARG0 (b / boy))")));
  }
  SUBCASE("reentrancy inside the subtree is preserved, not duplicated") {
    const AmrGraph want = parse("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))");
    const AmrGraph c = clone_subgraph(want, "w");
    CHECK(c.nodes.size() == 3);
    CHECK(c.edges.size() == 3);
    CHECK(canonical_form(c) == canonical_form(want));
  }
}

TEST_CASE("remove_subtree") {
  SUBCASE("basic removal") {
    const AmrGraph g = remove_subtree(fixture_graph(), "o");
    CHECK(g.nodes.size() == 1);
    CHECK(g.edges.empty());
    CHECK(validate(g).ok);
  }
  SUBCASE("root removal is an error") {
    CHECK_THROWS_AS((void)remove_subtree(fixture_graph(), "h"), std::invalid_argument);
  }
  SUBCASE("undeclared variable is an error") {
    CHECK_THROWS_AS((void)remove_subtree(fixture_graph(), "nope"), std::invalid_argument);
  }
  SUBCASE("snt children renumber consecutively") {
    const AmrGraph third = parse(fixtures::kOriginalPenman[2]);
    const AmrGraph g = remove_subtree(third, "h2");
    const char* expected = R"((m / multi-sentence
      :snt1 (ii / include-91
            :ARG1 (h / he)
            :ARG2 (c / character
                  :ARG1-of (f / favor-01
                        :ARG0 (ii2 / i)))
            :mod (a / as-well))
      :snt2 (w / wonder-01
            :ARG0 (ii3 / i)
            :ARG1 (t / that)
            :time (a3 / always))))";
    CHECK(canonical_form(g) == canonical_form(parse(expected)));
    CHECK(validate(g).ok);
  }
  SUBCASE("reentrantly referenced node survives removal of its subtree") {
    const AmrGraph diamond =
        parse("(a / alpha :ARG0 (b / beta :ARG1 (c / gamma)) :ARG2 c)");
    const AmrGraph g = remove_subtree(diamond, "b");
    CHECK(g.nodes.size() == 2);
    CHECK(validate(g).ok);
    CHECK(canonical_form(g) == canonical_form(parse("(a / alpha :ARG2 (c / gamma))")));
  }
}

TEST_CASE("insert_sentence_subgraph") {
  SUBCASE("single-sentence host gains a multi-sentence wrapper") {
    const AmrGraph host = fixture_graph();
    const AmrGraph sentence = parse("(s / seem-01 :ARG1 (r / realistic-03))");
    const AmrGraph g = insert_sentence_subgraph(host, sentence);
    CHECK(*g.concept_of(g.root) == "multi-sentence");
    const char* expected = R"((m / multi-sentence
      :snt1 (h / have-concession-91
            :ARG1 (o / orange
                  :domain (h2 / he)
                  :time (o2 / once)))
      :snt2 (s / seem-01
            :ARG1 (r / realistic-03))))";
    CHECK(canonical_form(g) == canonical_form(parse(expected)));
    CHECK(validate(g).ok);
    CHECK(depth(g) >= depth(sentence) + 1);
  }
  SUBCASE("multi-sentence host uses the next free index") {
    const AmrGraph host = parse(fixtures::kOriginalPenman[1]);  // three units
    const AmrGraph g = insert_sentence_subgraph(host, parse("(o / okay-04)"));
    bool found = false;
    for (const auto& e : g.edges) {
      if (e.source == g.root && e.role == ":snt4") found = true;
    }
    CHECK(found);
    CHECK(validate(g).ok);
  }
  SUBCASE("colliding variable names are renamed fresh") {
    const AmrGraph host = fixture_graph();
    const AmrGraph sentence = parse("(h / hot-05 :ARG1 (o / ocean))");  // h, o collide
    const AmrGraph g = insert_sentence_subgraph(host, sentence);
    REQUIRE(validate(g).ok);
    std::set<std::string> vars;
    for (const auto& n : g.nodes) {
      CHECK(vars.insert(n.var).second);
    }
    CHECK(g.nodes.size() == host.nodes.size() + sentence.nodes.size() + 1);
  }
}

TEST_CASE("canonical_form identifies graphs up to variable renaming") {
  const AmrGraph a = parse("(h / have-concession-91 :ARG1 (o / orange :domain (h2 / he)))");
  const AmrGraph b = parse("(x1 / have-concession-91 :ARG1 (q / orange :domain (zz / he)))");
  CHECK(canonical_form(a) == canonical_form(b));
  const AmrGraph c = parse("(h / have-concession-91 :ARG2 (o / orange :domain (h2 / he)))");
  CHECK(canonical_form(a) != canonical_form(c));
}

TEST_CASE("fresh_variable derives names from the concept initial") {
  std::set<std::string> used;
  CHECK(fresh_variable("orange", used) == "o");
  CHECK(fresh_variable("orange", used) == "o2");
  CHECK(fresh_variable("once", used) == "o3");
  CHECK(fresh_variable("-", used) == "x");  // no alphabetic character
  CHECK(used.size() == 4);
}

TEST_CASE("predicate helpers") {
  CHECK(is_predicate_concept("want-01"));
  CHECK(is_predicate_concept("have-rel-role-91"));
  CHECK_FALSE(is_predicate_concept("orange"));
  CHECK_FALSE(is_predicate_concept("amr-unknown"));
  CHECK_FALSE(is_predicate_concept("as-well"));
  CHECK(split_sense_suffix("like-01") == std::pair<std::string, std::string>{"like", "-01"});
  CHECK(split_sense_suffix("orange") == std::pair<std::string, std::string>{"orange", ""});
  CHECK(split_sense_suffix("have-rel-role-91") ==
        std::pair<std::string, std::string>{"have-rel-role", "-91"});
}

TEST_CASE("traversal_order is depth-first in stored edge order") {
  const auto order = traversal_order(parse(fixtures::kOriginalPenman[2]));
  const std::vector<std::string> expected = {"m",  "ii", "h",  "c",  "f",  "ii2", "a", "h2",
                                             "g",  "h3", "c2", "a2", "w",  "ii3", "t", "a3"};
  CHECK(order == expected);
}
