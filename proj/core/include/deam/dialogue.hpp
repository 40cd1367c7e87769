#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "deam/amr.hpp"

namespace deam {

// One speaker turn. `text` is the optional surface string; empty means
// absent. Graph edits never touch it.
struct Utterance {
  std::string speaker;
  std::string text;
  AmrGraph amr;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

// One recorded edit: which manipulation ran, which utterance it landed on
// (index valid at apply time), which variables it touched (operative
// variable first), and every random choice it made, so that replay is a
// pure function of (original conversation, record).
struct ManipulationStep {
  std::string name;
  std::size_t utterance = 0;
  std::vector<std::string> touched;
  nlohmann::json params = nlohmann::json::object();

  friend bool operator==(const ManipulationStep&, const ManipulationStep&) = default;
};

struct ManipulationRecord {
  std::string conversation_id;
  std::uint64_t seed = 0;
  std::vector<ManipulationStep> steps;

  bool empty() const { return steps.empty(); }

  friend bool operator==(const ManipulationRecord&, const ManipulationRecord&) = default;
};

// Label values used throughout; unlabeled conversations carry "".
inline constexpr const char* kLabelCoherent = "coherent";
inline constexpr const char* kLabelIncoherent = "incoherent";

struct Conversation {
  std::string id;
  std::string label;
  std::vector<Utterance> utterances;
  ManipulationRecord record;  // empty for untouched conversations

  friend bool operator==(const Conversation&, const Conversation&) = default;
};

// Field-level equality with AMRs compared canonically (variable naming and
// node declaration order ignored). This is the corpus round-trip notion of
// equality.
bool same_conversation(const Conversation& a, const Conversation& b);

// ---------------------------------------------------------------------------
// Corpus format: UTF-8 JSON Lines, one conversation per line, keys
// `id`, `label`, `utterances` (objects with `speaker`, `text`, `amr`) and
// `record`; absent label/text/record are null; AMR values are single-line
// PENMAN strings.

nlohmann::json conversation_to_json(const Conversation& conv);
Conversation conversation_from_json(const nlohmann::json& j);

std::string write_conversation_line(const Conversation& conv);
Conversation read_conversation_line(std::string_view line);

// Whole-stream readers attach line numbers (1-based), conversation ids and
// utterance indices to errors and reject duplicate ids.
std::vector<Conversation> read_corpus(std::istream& in);
void write_corpus(const std::vector<Conversation>& conversations, std::ostream& out);

std::vector<Conversation> load_corpus(const std::string& path);
void save_corpus(const std::vector<Conversation>& conversations, const std::string& path);

// ---------------------------------------------------------------------------
// Sentence units: a multi-sentence root contributes its `:sntK` children in
// index order; any other root is itself the single unit with index 1.

struct SentenceUnit {
  int index = 1;
  std::string var;

  friend bool operator==(const SentenceUnit&, const SentenceUnit&) = default;
};

std::vector<SentenceUnit> sentence_units(const AmrGraph& graph);
std::vector<SentenceUnit> sentence_units(const Utterance& utterance);

}  // namespace deam
