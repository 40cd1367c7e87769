#include "deam/dialogue.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace deam {

namespace {

using nlohmann::json;

json step_to_json(const ManipulationStep& step) {
  return json{{"name", step.name},
              {"utterance", step.utterance},
              {"touched", step.touched},
              {"params", step.params}};
}

ManipulationStep step_from_json(const json& j) {
  ManipulationStep step;
  step.name = j.at("name").get<std::string>();
  step.utterance = j.at("utterance").get<std::size_t>();
  step.touched = j.at("touched").get<std::vector<std::string>>();
  step.params = j.value("params", json::object());
  return step;
}

json record_to_json(const ManipulationRecord& record) {
  json steps = json::array();
  for (const auto& step : record.steps) steps.push_back(step_to_json(step));
  return json{{"conversation_id", record.conversation_id},
              {"seed", record.seed},
              {"steps", std::move(steps)}};
}

ManipulationRecord record_from_json(const json& j) {
  ManipulationRecord record;
  record.conversation_id = j.at("conversation_id").get<std::string>();
  record.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& step : j.at("steps")) record.steps.push_back(step_from_json(step));
  return record;
}

}  // namespace

bool same_conversation(const Conversation& a, const Conversation& b) {
  if (a.id != b.id || a.label != b.label || a.record != b.record) return false;
  if (a.utterances.size() != b.utterances.size()) return false;
  for (std::size_t i = 0; i < a.utterances.size(); ++i) {
    const Utterance& ua = a.utterances[i];
    const Utterance& ub = b.utterances[i];
    if (ua.speaker != ub.speaker || ua.text != ub.text) return false;
    if (canonical_form(ua.amr) != canonical_form(ub.amr)) return false;
  }
  return true;
}

json conversation_to_json(const Conversation& conv) {
  json utterances = json::array();
  for (const auto& utt : conv.utterances) {
    utterances.push_back(json{{"speaker", utt.speaker},
                              {"text", utt.text.empty() ? json() : json(utt.text)},
                              {"amr", serialize(utt.amr, PenmanStyle::single_line)}});
  }
  return json{{"id", conv.id},
              {"label", conv.label.empty() ? json() : json(conv.label)},
              {"utterances", std::move(utterances)},
              {"record", conv.record.empty() ? json() : record_to_json(conv.record)}};
}

Conversation conversation_from_json(const json& j) {
  Conversation conv;
  conv.id = j.at("id").get<std::string>();
  if (j.contains("label") && !j.at("label").is_null()) {
    conv.label = j.at("label").get<std::string>();
  }
  if (!conv.label.empty() && conv.label != kLabelCoherent && conv.label != kLabelIncoherent) {
    throw std::runtime_error("conversation " + conv.id + ": unknown label '" + conv.label + "'");
  }
  const json& utterances = j.at("utterances");
  if (!utterances.is_array() || utterances.empty()) {
    throw std::runtime_error("conversation " + conv.id + ": utterances must be a nonempty array");
  }
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    const json& ju = utterances[i];
    Utterance utt;
    utt.speaker = ju.at("speaker").get<std::string>();
    if (utt.speaker.empty()) {
      throw std::runtime_error("conversation " + conv.id + ", utterance " + std::to_string(i) +
                               ": empty speaker");
    }
    if (ju.contains("text") && !ju.at("text").is_null()) {
      utt.text = ju.at("text").get<std::string>();
    }
    try {
      utt.amr = parse(ju.at("amr").get<std::string>());
    } catch (const parse_error& e) {
      throw std::runtime_error("conversation " + conv.id + ", utterance " + std::to_string(i) +
                               ": " + e.what() + " (at offset " + std::to_string(e.offset()) +
                               ")");
    }
    conv.utterances.push_back(std::move(utt));
  }
  if (j.contains("record") && !j.at("record").is_null()) {
    conv.record = record_from_json(j.at("record"));
  }
  return conv;
}

std::string write_conversation_line(const Conversation& conv) {
  return conversation_to_json(conv).dump();
}

Conversation read_conversation_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed line: ") + e.what());
  }
  try {
    return conversation_from_json(j);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed record: ") + e.what());
  }
}

std::vector<Conversation> read_corpus(std::istream& in) {
  std::vector<Conversation> conversations;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    Conversation conv;
    try {
      conv = read_conversation_line(line);
    } catch (const std::exception& e) {
      throw std::runtime_error("line " + std::to_string(line_number) + ": " + e.what());
    }
    if (!ids.insert(conv.id).second) {
      throw std::runtime_error("line " + std::to_string(line_number) +
                               ": duplicate conversation id '" + conv.id + "'");
    }
    conversations.push_back(std::move(conv));
  }
  return conversations;
}

void write_corpus(const std::vector<Conversation>& conversations, std::ostream& out) {
  for (const auto& conv : conversations) {
    out << write_conversation_line(conv) << '\n';
  }
  if (!out) throw std::runtime_error("corpus write failed");
}

std::vector<Conversation> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  try {
    return read_corpus(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void save_corpus(const std::vector<Conversation>& conversations, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  write_corpus(conversations, out);
}

std::vector<SentenceUnit> sentence_units(const AmrGraph& graph) {
  std::vector<SentenceUnit> units;
  const std::string* root_concept = graph.concept_of(graph.root);
  if (root_concept != nullptr && *root_concept == "multi-sentence") {
    for (const auto& e : graph.edges) {
      if (e.source == graph.root && is_snt_role(e.role)) {
        units.push_back({snt_role_index(e.role), e.target});
      }
    }
    std::stable_sort(units.begin(), units.end(),
                     [](const SentenceUnit& a, const SentenceUnit& b) { return a.index < b.index; });
    return units;
  }
  if (root_concept != nullptr) units.push_back({1, graph.root});
  return units;
}

std::vector<SentenceUnit> sentence_units(const Utterance& utterance) {
  return sentence_units(utterance.amr);
}

}  // namespace deam
