#include "deam/manipulate.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

namespace deam {

namespace {

using nlohmann::json;

[[noreturn]] void mismatch(const std::string& detail) {
  throw std::runtime_error("replay mismatch: " + detail);
}

bool role_is_arg(std::string_view role) { return role.starts_with(":ARG"); }

bool role_is_arg_or_op(std::string_view role) {
  return role.starts_with(":ARG") || role.starts_with(":op");
}

int in_degree(const AmrGraph& g, std::string_view var) {
  int n = 0;
  for (const auto& e : g.edges) {
    if (e.target == var) ++n;
  }
  return n;
}

bool subtree_contains_concept(const AmrGraph& g, const std::string& from,
                              std::string_view concept_label) {
  std::set<std::string> seen{from};
  std::vector<std::string> queue{from};
  while (!queue.empty()) {
    const std::string var = queue.back();
    queue.pop_back();
    const std::string* c = g.concept_of(var);
    if (c != nullptr && *c == concept_label) return true;
    for (const auto& e : g.edges) {
      if (e.source == var && seen.insert(e.target).second) queue.push_back(e.target);
    }
  }
  return false;
}

bool has_minus_polarity(const AmrGraph& g, std::string_view var) {
  return std::any_of(g.attributes.begin(), g.attributes.end(), [&](const AmrAttribute& a) {
    return a.source == var && a.role == ":polarity" && a.value.kind == Constant::Kind::minus;
  });
}

void rewrite_concept(AmrGraph& g, const std::string& var, const std::string& expected_from,
                     const std::string& to) {
  for (auto& n : g.nodes) {
    if (n.var == var) {
      if (n.concept_label != expected_from) {
        mismatch("node " + var + " has concept '" + n.concept_label + "', expected '" +
                 expected_from + "'");
      }
      n.concept_label = to;
      return;
    }
  }
  mismatch("no node with variable " + var);
}

std::size_t checked_index(const json& j, const char* key, std::size_t limit,
                          const char* what) {
  const auto v = j.at(key).get<std::size_t>();
  if (v >= limit) mismatch(std::string(what) + " out of range");
  return v;
}

// ---------------------------------------------------------------------------
// Contradiction

struct ContradictionOptions {
  std::string action;  // "antonym" | "remove_polarity" | "add_polarity"
  std::vector<std::string> antonym_choices;
};

std::optional<ContradictionOptions> contradiction_options(const AmrGraph& g,
                                                          const std::string& var,
                                                          const AntonymLexicon& lexicon) {
  const std::string* c = g.concept_of(var);
  if (c == nullptr) return std::nullopt;
  std::set<std::string> ants = antonyms_of(lexicon, *c);
  ants.erase(*c);
  if (!ants.empty()) {
    return ContradictionOptions{"antonym", {ants.begin(), ants.end()}};
  }
  if (has_minus_polarity(g, var)) {
    return ContradictionOptions{"remove_polarity", {}};
  }
  if (is_predicate_concept(*c)) {
    return ContradictionOptions{"add_polarity", {}};
  }
  return std::nullopt;
}

Conversation apply_contradiction(const Conversation& conv, const ManipulationStep& step) {
  if (step.utterance >= conv.utterances.size()) mismatch("contradiction target out of range");
  const json& params = step.params;
  const std::size_t source = checked_index(params, "source", conv.utterances.size(),
                                           "contradiction source");
  const AmrGraph& source_graph = conv.utterances[source].amr;
  const auto units = sentence_units(source_graph);
  if (units.empty()) mismatch("contradiction source has no sentence units");

  std::map<int, std::pair<std::string, std::string>> actions;  // unit -> (action, to)
  for (const auto& ju : params.at("units")) {
    const int unit = ju.at("unit").get<int>();
    actions[unit] = {ju.at("action").get<std::string>(), ju.value("to", "")};
  }

  Conversation out = conv;
  AmrGraph target = out.utterances[step.utterance].amr;
  std::set<int> applied;
  for (const auto& [index, var] : units) {
    AmrGraph clone = clone_subgraph(source_graph, var);
    const auto it = actions.find(index);
    if (it != actions.end()) {
      applied.insert(index);
      const auto& [action, to] = it->second;
      if (action == "antonym") {
        if (to.empty()) mismatch("antonym action without replacement concept");
        rewrite_concept(clone, clone.root, *clone.concept_of(clone.root), to);
      } else if (action == "add_polarity") {
        clone.attributes.push_back({clone.root, ":polarity", Constant::minus()});
      } else if (action == "remove_polarity") {
        auto& attrs = clone.attributes;
        attrs.erase(std::remove_if(attrs.begin(), attrs.end(),
                                   [&](const AmrAttribute& a) {
                                     return a.source == clone.root && a.role == ":polarity" &&
                                            a.value.kind == Constant::Kind::minus;
                                   }),
                    attrs.end());
      } else {
        mismatch("unknown contradiction action '" + action + "'");
      }
    }
    target = insert_sentence_subgraph(target, clone);
  }
  if (applied.size() != actions.size()) {
    mismatch("contradiction names sentence units the source does not have");
  }
  out.utterances[step.utterance].amr = std::move(target);
  return out;
}

// ---------------------------------------------------------------------------
// Engagement

Conversation apply_engagement(const Conversation& conv, const ManipulationStep& step) {
  if (step.utterance >= conv.utterances.size()) mismatch("engagement utterance out of range");
  const json& params = step.params;
  const std::string strategy = params.at("strategy").get<std::string>();
  Conversation out = conv;
  AmrGraph& g = out.utterances[step.utterance].amr;

  if (strategy == "question") {
    if (params.value("drop_utterance", false)) {
      if (out.utterances.size() < 2) mismatch("cannot drop the only utterance");
      out.utterances.erase(out.utterances.begin() +
                           static_cast<std::ptrdiff_t>(step.utterance));
      return out;
    }
    const int unit = params.at("unit").get<int>();
    const auto units = sentence_units(g);
    const auto it = std::find_if(units.begin(), units.end(),
                                 [&](const SentenceUnit& su) { return su.index == unit; });
    if (it == units.end()) mismatch("no sentence unit with index " + std::to_string(unit));
    g = remove_subtree(g, it->var);
    return out;
  }
  if (strategy == "deepest") {
    const std::string anchor = params.at("anchor").get<std::string>();
    if (!g.has_var(anchor)) mismatch("no node with variable " + anchor);
    g = remove_subtree(g, anchor);
    return out;
  }
  if (strategy == "arguments") {
    for (const auto& je : params.at("edges")) {
      const AmrEdge edge{je.at("source").get<std::string>(), je.at("role").get<std::string>(),
                         je.at("target").get<std::string>()};
      if (std::find(g.edges.begin(), g.edges.end(), edge) == g.edges.end()) {
        mismatch("no edge " + edge.source + " " + edge.role + " " + edge.target);
      }
      g = remove_edge_subtree(g, edge);
    }
    return out;
  }
  mismatch("unknown engagement strategy '" + strategy + "'");
}

// ---------------------------------------------------------------------------
// Baselines (replayed purely from parameters)

std::vector<std::size_t> checked_permutation(const json& params, std::size_t n) {
  auto perm = params.at("permutation").get<std::vector<std::size_t>>();
  if (perm.size() != n) mismatch("permutation length does not fit");
  std::vector<std::size_t> sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (sorted[i] != i) mismatch("not a permutation");
  }
  return perm;
}

Conversation apply_shuffle_turns(const Conversation& conv, const ManipulationStep& step) {
  const auto perm = checked_permutation(step.params, conv.utterances.size());
  Conversation out = conv;
  for (std::size_t i = 0; i < perm.size(); ++i) out.utterances[i] = conv.utterances[perm[i]];
  return out;
}

Conversation apply_shuffle_speaker(const Conversation& conv, const ManipulationStep& step) {
  const std::string speaker = step.params.at("speaker").get<std::string>();
  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < conv.utterances.size(); ++i) {
    if (conv.utterances[i].speaker == speaker) positions.push_back(i);
  }
  const auto perm = checked_permutation(step.params, positions.size());
  Conversation out = conv;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    out.utterances[positions[i]] = conv.utterances[positions[perm[i]]];
  }
  return out;
}

Conversation apply_swap_halves(const Conversation& conv) {
  const std::size_t n = conv.utterances.size();
  if (n < 2) mismatch("swap_halves needs at least 2 utterances");
  const std::size_t split = (n + 1) / 2;
  Conversation out = conv;
  out.utterances.clear();
  out.utterances.insert(out.utterances.end(), conv.utterances.begin() + split,
                        conv.utterances.end());
  out.utterances.insert(out.utterances.end(), conv.utterances.begin(),
                        conv.utterances.begin() + split);
  return out;
}

Conversation apply_inject(const Conversation& conv, const ManipulationStep& step) {
  const json& params = step.params;
  const std::string mode = params.at("mode").get<std::string>();
  const json& jd = params.at("donor");
  Utterance donor;
  donor.speaker = jd.at("speaker").get<std::string>();
  if (jd.contains("text") && !jd.at("text").is_null()) donor.text = jd.at("text").get<std::string>();
  try {
    donor.amr = parse(jd.at("amr").get<std::string>());
  } catch (const parse_error& e) {
    mismatch(std::string("donor AMR does not parse: ") + e.what());
  }
  Conversation out = conv;
  const std::size_t n = out.utterances.size();
  const auto position = params.at("position").get<std::size_t>();
  if (mode == "insert") {
    if (position > n) mismatch("insert position out of range");
    out.utterances.insert(out.utterances.begin() + static_cast<std::ptrdiff_t>(position),
                          std::move(donor));
  } else if (mode == "replace") {
    if (position >= n) mismatch("replace position out of range");
    out.utterances[position] = std::move(donor);
  } else {
    mismatch("unknown inject mode '" + mode + "'");
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

std::string to_string(EngagementStrategy strategy) {
  switch (strategy) {
    case EngagementStrategy::question:
      return "question";
    case EngagementStrategy::deepest:
      return "deepest";
    case EngagementStrategy::arguments:
      return "arguments";
  }
  return "";
}

std::optional<EngagementStrategy> engagement_strategy_from_name(std::string_view name) {
  if (name == "question") return EngagementStrategy::question;
  if (name == "deepest") return EngagementStrategy::deepest;
  if (name == "arguments") return EngagementStrategy::arguments;
  return std::nullopt;
}

void ManipulationConfig::check() const {
  auto fail = [](const std::string& why) { throw std::invalid_argument("config: " + why); };
  if (enabled.empty()) fail("enabled list is empty");
  std::set<std::string> seen;
  for (const auto& name : enabled) {
    if (std::find(std::begin(kSemanticManipulations), std::end(kSemanticManipulations), name) ==
        std::end(kSemanticManipulations)) {
      fail("unknown manipulation '" + name + "'");
    }
    if (!seen.insert(name).second) fail("duplicate manipulation '" + name + "'");
  }
  if (min_ops < 1) fail("min_ops must be >= 1");
  if (max_ops < min_ops) fail("max_ops must be >= min_ops");
  if (max_ops > static_cast<int>(enabled.size())) fail("max_ops exceeds enabled manipulations");
  if (pronouns.size() < 2) fail("pronoun inventory needs at least 2 entries");
  for (const auto& p : pronouns) {
    if (p.empty()) fail("empty pronoun");
  }
  if (coref_max_items < 1) fail("coref.max_items must be >= 1");
  if (irrelevancy_min_items < 1) fail("irrelevancy.min_items must be >= 1");
  if (irrelevancy_max_items < irrelevancy_min_items) {
    fail("irrelevancy.max_items must be >= irrelevancy.min_items");
  }
  if (arguments_min_items < 1) fail("arguments.min_items must be >= 1");
  if (arguments_max_items < arguments_min_items) {
    fail("arguments.max_items must be >= arguments.min_items");
  }
  if (engagement_weights.question < 0 || engagement_weights.deepest < 0 ||
      engagement_weights.arguments < 0) {
    fail("engagement weights must be >= 0");
  }
  if (engagement_weights.question + engagement_weights.deepest + engagement_weights.arguments <=
      0) {
    fail("engagement weights sum to zero");
  }
  if (baseline_mix.empty()) fail("baseline mix is empty");
  std::set<std::string> mix_seen;
  for (const auto& name : baseline_mix) {
    if (std::find(std::begin(kBaselinePrimitives), std::end(kBaselinePrimitives), name) ==
        std::end(kBaselinePrimitives)) {
      fail("unknown baseline primitive '" + name + "'");
    }
    if (!mix_seen.insert(name).second) fail("duplicate baseline primitive '" + name + "'");
  }
}

json config_to_json(const ManipulationConfig& c) {
  return json{{"enabled", c.enabled},
              {"min_ops", c.min_ops},
              {"max_ops", c.max_ops},
              {"pronouns", c.pronouns},
              {"coref", {{"max_items", c.coref_max_items}}},
              {"irrelevancy",
               {{"min_items", c.irrelevancy_min_items},
                {"max_items", c.irrelevancy_max_items},
                {"cross_conversation", c.irrelevancy_cross_conversation}}},
              {"arguments",
               {{"min_items", c.arguments_min_items}, {"max_items", c.arguments_max_items}}},
              {"engagement_weights",
               {{"question", c.engagement_weights.question},
                {"deepest", c.engagement_weights.deepest},
                {"arguments", c.engagement_weights.arguments}}},
              {"baseline", {{"mix", c.baseline_mix}}}};
}

ManipulationConfig config_from_json(const json& j) {
  ManipulationConfig c;
  if (j.contains("enabled")) c.enabled = j.at("enabled").get<std::vector<std::string>>();
  if (j.contains("min_ops")) c.min_ops = j.at("min_ops").get<int>();
  if (j.contains("max_ops")) c.max_ops = j.at("max_ops").get<int>();
  if (j.contains("pronouns")) c.pronouns = j.at("pronouns").get<std::vector<std::string>>();
  if (j.contains("coref")) {
    const json& s = j.at("coref");
    if (s.contains("max_items")) c.coref_max_items = s.at("max_items").get<int>();
  }
  if (j.contains("irrelevancy")) {
    const json& s = j.at("irrelevancy");
    if (s.contains("min_items")) c.irrelevancy_min_items = s.at("min_items").get<int>();
    if (s.contains("max_items")) c.irrelevancy_max_items = s.at("max_items").get<int>();
    if (s.contains("cross_conversation")) {
      c.irrelevancy_cross_conversation = s.at("cross_conversation").get<bool>();
    }
  }
  if (j.contains("arguments")) {
    const json& s = j.at("arguments");
    if (s.contains("min_items")) c.arguments_min_items = s.at("min_items").get<int>();
    if (s.contains("max_items")) c.arguments_max_items = s.at("max_items").get<int>();
  }
  if (j.contains("engagement_weights")) {
    const json& s = j.at("engagement_weights");
    if (s.contains("question")) c.engagement_weights.question = s.at("question").get<double>();
    if (s.contains("deepest")) c.engagement_weights.deepest = s.at("deepest").get<double>();
    if (s.contains("arguments")) c.engagement_weights.arguments = s.at("arguments").get<double>();
  }
  if (j.contains("baseline")) {
    const json& s = j.at("baseline");
    if (s.contains("mix")) c.baseline_mix = s.at("mix").get<std::vector<std::string>>();
  }
  c.check();
  return c;
}

ManipulationConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Planners

std::optional<ManipulationResult> contradict(const Conversation& conv,
                                             const AntonymLexicon& lexicon, Rng& rng,
                                             const ManipulationConfig& config) {
  (void)config;
  struct Eligible {
    int unit;
    ContradictionOptions options;
  };
  struct Source {
    std::size_t u;
    std::vector<Eligible> eligible;
    std::vector<std::size_t> targets;
  };
  std::vector<Source> sources;
  const std::size_t n = conv.utterances.size();
  for (std::size_t u = 0; u < n; ++u) {
    std::vector<std::size_t> targets;
    for (std::size_t t = u + 1; t < n; ++t) {
      if (conv.utterances[t].speaker == conv.utterances[u].speaker) targets.push_back(t);
    }
    if (targets.empty()) continue;
    const AmrGraph& g = conv.utterances[u].amr;
    std::vector<Eligible> eligible;
    for (const auto& [index, var] : sentence_units(g)) {
      if (auto options = contradiction_options(g, var, lexicon)) {
        eligible.push_back({index, std::move(*options)});
      }
    }
    if (eligible.empty()) continue;
    sources.push_back({u, std::move(eligible), std::move(targets)});
  }
  if (sources.empty()) return std::nullopt;

  const Source& source = sources[rng.below(sources.size())];
  const std::size_t target = source.targets[rng.below(source.targets.size())];
  const std::size_t count = 1 + rng.below(source.eligible.size());
  auto chosen = rng.sample_indices(source.eligible.size(), count);
  std::sort(chosen.begin(), chosen.end());

  json units = json::array();
  for (std::size_t idx : chosen) {
    const Eligible& e = source.eligible[idx];
    json ju{{"unit", e.unit}, {"action", e.options.action}};
    if (e.options.action == "antonym") {
      ju["to"] = e.options.antonym_choices[rng.below(e.options.antonym_choices.size())];
    }
    units.push_back(std::move(ju));
  }

  ManipulationStep step;
  step.name = kManipContradiction;
  step.utterance = target;
  step.params = json{{"source", source.u}, {"units", std::move(units)}};

  Conversation out = apply_step(conv, step);
  // The inserted clones are the trailing sentence units of the target.
  const auto units_after = sentence_units(out.utterances[target].amr);
  const std::size_t inserted = sentence_units(conv.utterances[source.u].amr).size();
  for (std::size_t i = units_after.size() - inserted; i < units_after.size(); ++i) {
    step.touched.push_back(units_after[i].var);
  }
  return ManipulationResult{std::move(out), {std::move(step)}};
}

std::optional<ManipulationResult> coref_inconsistency(const Conversation& conv, Rng& rng,
                                                      const ManipulationConfig& config) {
  const std::set<std::string> inventory(config.pronouns.begin(), config.pronouns.end());
  std::vector<std::pair<std::size_t, std::string>> candidates;
  for (std::size_t u = 0; u < conv.utterances.size(); ++u) {
    const AmrGraph& g = conv.utterances[u].amr;
    std::set<std::string> arg_targets;
    for (const auto& e : g.edges) {
      if (role_is_arg(e.role)) arg_targets.insert(e.target);
    }
    for (const auto& var : traversal_order(g)) {
      if (arg_targets.count(var) != 0 && inventory.count(*g.concept_of(var)) != 0) {
        candidates.emplace_back(u, var);
      }
    }
  }
  if (candidates.empty()) return std::nullopt;

  std::set<std::string> noun_pool;
  for (const auto& utt : conv.utterances) {
    for (const auto& e : utt.amr.edges) {
      if (!role_is_arg_or_op(e.role)) continue;
      const std::string* c = utt.amr.concept_of(e.target);
      if (c == nullptr || c->empty()) continue;
      if (is_predicate_concept(*c) || inventory.count(*c) != 0) continue;
      if (*c == "amr-unknown" || *c == "multi-sentence") continue;
      noun_pool.insert(*c);
    }
  }

  const std::size_t limit = std::min<std::size_t>(config.coref_max_items, candidates.size());
  const std::size_t count = 1 + rng.below(limit);
  auto chosen = rng.sample_indices(candidates.size(), count);
  std::sort(chosen.begin(), chosen.end());

  Conversation out = conv;
  std::vector<ManipulationStep> steps;
  for (std::size_t idx : chosen) {
    const auto& [u, var] = candidates[idx];
    const std::string from = *out.utterances[u].amr.concept_of(var);
    std::vector<std::string> pronoun_options;
    for (const auto& p : config.pronouns) {
      if (p != from) pronoun_options.push_back(p);
    }
    std::vector<std::string> noun_options;
    for (const auto& c : noun_pool) {
      if (c != from) noun_options.push_back(c);
    }
    const bool use_nouns = !noun_options.empty() && rng.coin();
    const auto& pool = use_nouns ? noun_options : pronoun_options;
    const std::string to = pool[rng.below(pool.size())];

    ManipulationStep step;
    step.name = kManipCoreference;
    step.utterance = u;
    step.touched = {var};
    step.params = json{{"from", from}, {"to", to}};
    out = apply_step(out, step);
    steps.push_back(std::move(step));
  }
  return ManipulationResult{std::move(out), std::move(steps)};
}

std::optional<ManipulationResult> irrelevancy(const Conversation& conv, Rng& rng,
                                              const ManipulationConfig& config,
                                              const DonorPool* extra_donors) {
  const std::size_t n = conv.utterances.size();
  if (n < 2) return std::nullopt;

  struct Item {
    std::size_t u;
    std::string var;
    std::string concept_label;
    bool predicate;
  };
  std::vector<Item> items;
  std::vector<std::set<std::string>> predicate_concepts(n), other_concepts(n);
  for (std::size_t u = 0; u < n; ++u) {
    const AmrGraph& g = conv.utterances[u].amr;
    std::set<std::string> arg_op_targets;
    for (const auto& e : g.edges) {
      if (role_is_arg_or_op(e.role)) arg_op_targets.insert(e.target);
    }
    for (const auto& var : traversal_order(g)) {
      const std::string& c = *g.concept_of(var);
      const bool predicate = is_predicate_concept(c);
      if (!predicate && arg_op_targets.count(var) == 0) continue;
      items.push_back({u, var, c, predicate});
      (predicate ? predicate_concepts : other_concepts)[u].insert(c);
    }
  }

  auto donors_for = [&](const Item& item) {
    std::set<std::string> pool;
    for (std::size_t u = 0; u < n; ++u) {
      if (u == item.u) continue;
      const auto& src = item.predicate ? predicate_concepts[u] : other_concepts[u];
      pool.insert(src.begin(), src.end());
    }
    if (config.irrelevancy_cross_conversation && extra_donors != nullptr) {
      const auto& extra = item.predicate ? extra_donors->predicates : extra_donors->nonpredicates;
      pool.insert(extra.begin(), extra.end());
    }
    pool.erase(item.concept_label);
    return std::vector<std::string>(pool.begin(), pool.end());
  };

  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!donors_for(items[i]).empty()) eligible.push_back(i);
  }
  if (eligible.empty()) return std::nullopt;

  const int span = config.irrelevancy_max_items - config.irrelevancy_min_items + 1;
  std::size_t count =
      static_cast<std::size_t>(config.irrelevancy_min_items + rng.below(span));
  count = std::min(count, eligible.size());
  auto chosen = rng.sample_indices(eligible.size(), count);
  std::sort(chosen.begin(), chosen.end());

  Conversation out = conv;
  std::vector<ManipulationStep> steps;
  for (std::size_t idx : chosen) {
    const Item& item = items[eligible[idx]];
    const auto donors = donors_for(item);
    const std::string to = donors[rng.below(donors.size())];

    ManipulationStep step;
    step.name = kManipIrrelevancy;
    step.utterance = item.u;
    step.touched = {item.var};
    step.params = json{{"from", item.concept_label}, {"to", to}};
    out = apply_step(out, step);
    steps.push_back(std::move(step));
  }
  return ManipulationResult{std::move(out), std::move(steps)};
}

std::optional<ManipulationResult> decrease_engagement(const Conversation& conv, Rng& rng,
                                                      const ManipulationConfig& config,
                                                      std::optional<EngagementStrategy> strategy) {
  const std::size_t n = conv.utterances.size();

  // question strategy candidates
  struct QuestionCand {
    std::size_t u;
    int unit;
    bool drop;
  };
  std::vector<QuestionCand> question_cands;
  for (std::size_t u = 0; u < n; ++u) {
    const AmrGraph& g = conv.utterances[u].amr;
    const auto units = sentence_units(g);
    for (const auto& [index, var] : units) {
      if (!subtree_contains_concept(g, var, "amr-unknown")) continue;
      if (units.size() == 1) {
        if (n >= 2) question_cands.push_back({u, index, true});
      } else if (in_degree(g, var) == 1) {
        question_cands.push_back({u, index, false});
      }
    }
  }

  // deepest strategy candidates, restricted to maximal-depth utterances
  struct DeepestCand {
    std::size_t u;
    std::string anchor;
  };
  std::vector<std::vector<DeepestCand>> deepest_by_utterance;
  {
    int max_depth = 0;
    std::vector<int> depths(n, 0);
    for (std::size_t u = 0; u < n; ++u) {
      depths[u] = depth(conv.utterances[u].amr);
      max_depth = std::max(max_depth, depths[u]);
    }
    if (max_depth >= 2) {
      for (std::size_t u = 0; u < n; ++u) {
        if (depths[u] != max_depth) continue;
        const AmrGraph& g = conv.utterances[u].amr;
        const auto dist = node_depths(g);
        std::vector<DeepestCand> cands;
        std::set<std::string> anchors_seen;
        for (const auto& var : traversal_order(g)) {
          if (dist.at(var) != max_depth) continue;
          // Parent on the longest path: first in-edge from depth-1 above.
          for (const auto& e : g.edges) {
            if (e.target != var) continue;
            const auto it = dist.find(e.source);
            if (it == dist.end() || it->second != max_depth - 1) continue;
            if (e.source != g.root && in_degree(g, e.source) == 1 &&
                anchors_seen.insert(e.source).second) {
              cands.push_back({u, e.source});
            }
            break;
          }
        }
        if (!cands.empty()) deepest_by_utterance.push_back(std::move(cands));
      }
    }
  }

  // argument-removal candidates
  struct ArgumentCand {
    std::size_t u;
    std::vector<AmrEdge> removable;  // stored edge order
  };
  std::vector<ArgumentCand> argument_cands;
  for (std::size_t u = 0; u < n; ++u) {
    const AmrGraph& g = conv.utterances[u].amr;
    std::set<std::string> unit_roots;
    for (const auto& [index, var] : sentence_units(g)) unit_roots.insert(var);
    std::vector<AmrEdge> removable;
    for (const auto& e : g.edges) {
      if (unit_roots.count(e.source) != 0 && role_is_arg_or_op(e.role) &&
          in_degree(g, e.target) == 1) {
        removable.push_back(e);
      }
    }
    if (!removable.empty()) argument_cands.push_back({u, std::move(removable)});
  }

  std::vector<std::pair<EngagementStrategy, double>> applicable;
  if (!question_cands.empty() && config.engagement_weights.question > 0) {
    applicable.push_back({EngagementStrategy::question, config.engagement_weights.question});
  }
  if (!deepest_by_utterance.empty() && config.engagement_weights.deepest > 0) {
    applicable.push_back({EngagementStrategy::deepest, config.engagement_weights.deepest});
  }
  if (!argument_cands.empty() && config.engagement_weights.arguments > 0) {
    applicable.push_back({EngagementStrategy::arguments, config.engagement_weights.arguments});
  }

  EngagementStrategy picked;
  if (strategy.has_value()) {
    const bool ok = std::any_of(applicable.begin(), applicable.end(),
                                [&](const auto& p) { return p.first == *strategy; });
    if (!ok) {
      // Allow an explicitly requested strategy even when its weight is 0.
      if (*strategy == EngagementStrategy::question && !question_cands.empty()) {
        // applicable despite weight
      } else if (*strategy == EngagementStrategy::deepest && !deepest_by_utterance.empty()) {
        // applicable despite weight
      } else if (*strategy == EngagementStrategy::arguments && !argument_cands.empty()) {
        // applicable despite weight
      } else {
        return std::nullopt;
      }
    }
    picked = *strategy;
  } else {
    if (applicable.empty()) return std::nullopt;
    double total = 0;
    for (const auto& [s, w] : applicable) total += w;
    const double r = rng.unit() * total;
    double acc = 0;
    picked = applicable.back().first;
    for (const auto& [s, w] : applicable) {
      acc += w;
      if (r < acc) {
        picked = s;
        break;
      }
    }
  }

  ManipulationStep step;
  step.name = kManipEngagement;

  if (picked == EngagementStrategy::question) {
    const QuestionCand& cand = question_cands[rng.below(question_cands.size())];
    step.utterance = cand.u;
    const AmrGraph& g = conv.utterances[cand.u].amr;
    if (cand.drop) {
      step.params = json{{"strategy", "question"}, {"drop_utterance", true}};
      step.touched = {g.root};
    } else {
      step.params = json{{"strategy", "question"}, {"unit", cand.unit}};
      const auto units = sentence_units(g);
      for (const auto& [index, var] : units) {
        if (index == cand.unit) step.touched = {var};
      }
    }
  } else if (picked == EngagementStrategy::deepest) {
    const auto& per_utt = deepest_by_utterance[rng.below(deepest_by_utterance.size())];
    const DeepestCand& cand = per_utt[rng.below(per_utt.size())];
    step.utterance = cand.u;
    step.touched = {cand.anchor};
    step.params = json{{"strategy", "deepest"}, {"anchor", cand.anchor}};
  } else {
    const ArgumentCand& cand = argument_cands[rng.below(argument_cands.size())];
    step.utterance = cand.u;
    const int span = config.arguments_max_items - config.arguments_min_items + 1;
    std::size_t count =
        static_cast<std::size_t>(config.arguments_min_items + rng.below(span));
    count = std::min(count, cand.removable.size());
    auto chosen = rng.sample_indices(cand.removable.size(), count);
    std::sort(chosen.begin(), chosen.end());
    json edges = json::array();
    for (std::size_t idx : chosen) {
      const AmrEdge& e = cand.removable[idx];
      edges.push_back(json{{"source", e.source}, {"role", e.role}, {"target", e.target}});
      step.touched.push_back(e.target);
    }
    step.params = json{{"strategy", "arguments"}, {"edges", std::move(edges)}};
  }

  Conversation out = apply_step(conv, step);
  return ManipulationResult{std::move(out), {std::move(step)}};
}

// ---------------------------------------------------------------------------
// Replay

Conversation apply_step(const Conversation& conv, const ManipulationStep& step) {
  try {
    if (step.name == kManipContradiction) return apply_contradiction(conv, step);
    if (step.name == kManipCoreference || step.name == kManipIrrelevancy) {
      if (step.utterance >= conv.utterances.size()) mismatch("utterance index out of range");
      if (step.touched.empty()) mismatch("concept rewrite without a touched variable");
      Conversation out = conv;
      rewrite_concept(out.utterances[step.utterance].amr, step.touched.front(),
                      step.params.at("from").get<std::string>(),
                      step.params.at("to").get<std::string>());
      return out;
    }
    if (step.name == kManipEngagement) return apply_engagement(conv, step);
    if (step.name == kBaselineShuffleTurns) return apply_shuffle_turns(conv, step);
    if (step.name == kBaselineShuffleSpeaker) return apply_shuffle_speaker(conv, step);
    if (step.name == kBaselineSwapHalves) return apply_swap_halves(conv);
    if (step.name == kBaselineInject) return apply_inject(conv, step);
  } catch (const json::exception& e) {
    mismatch(std::string("bad step parameters for '") + step.name + "': " + e.what());
  }
  mismatch("unknown manipulation '" + step.name + "'");
}

Conversation apply_record(const Conversation& conv, const ManipulationRecord& record) {
  Conversation out = conv;
  for (const auto& step : record.steps) out = apply_step(out, step);
  if (!record.steps.empty()) {
    out.label = kLabelIncoherent;
    out.record = record;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline

std::uint64_t conversation_seed(std::uint64_t global_seed, std::string_view conversation_id) {
  Rng mixer(global_seed ^ fnv1a64(conversation_id));
  return mixer.next();
}

int draw_op_count(Rng& rng, const ManipulationConfig& config) {
  return config.min_ops +
         static_cast<int>(rng.below(static_cast<std::uint64_t>(config.max_ops - config.min_ops + 1)));
}

PipelineOutcome apply_pipeline(const Conversation& conv, const ManipulationConfig& config,
                               const AntonymLexicon& lexicon, std::uint64_t global_seed,
                               const DonorPool* extra_donors) {
  config.check();
  if (conv.label == kLabelIncoherent) {
    throw std::invalid_argument("apply_pipeline: conversation already labeled incoherent");
  }

  const std::uint64_t seed = conversation_seed(global_seed, conv.id);
  Rng rng(seed);
  const int drawn = draw_op_count(rng, config);

  std::vector<std::string> pool = config.enabled;
  rng.shuffle(pool);
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(drawn), pool.size());
  std::vector<std::string> queue(pool.begin(), pool.begin() + k);
  std::deque<std::string> spares(pool.begin() + k, pool.end());

  Conversation out = conv;
  std::vector<ManipulationStep> steps;
  for (std::size_t i = 0; i < queue.size(); ++i) {
    const std::string& name = queue[i];
    std::optional<ManipulationResult> result;
    if (name == kManipContradiction) {
      result = contradict(out, lexicon, rng, config);
    } else if (name == kManipCoreference) {
      result = coref_inconsistency(out, rng, config);
    } else if (name == kManipIrrelevancy) {
      result = irrelevancy(out, rng, config, extra_donors);
    } else {
      result = decrease_engagement(out, rng, config);
    }
    if (result.has_value()) {
      out = std::move(result->conversation);
      for (auto& step : result->steps) steps.push_back(std::move(step));
    } else if (!spares.empty()) {
      queue.push_back(spares.front());
      spares.pop_front();
    }
  }

  PipelineOutcome outcome;
  outcome.record = ManipulationRecord{conv.id, seed, std::move(steps)};
  if (outcome.record.steps.empty()) {
    outcome.conversation = conv;
    outcome.applied = false;
  } else {
    out.label = kLabelIncoherent;
    out.record = outcome.record;
    outcome.conversation = std::move(out);
    outcome.applied = true;
  }
  return outcome;
}

}  // namespace deam
