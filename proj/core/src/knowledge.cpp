#include "deam/knowledge.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <stdexcept>
#include <vector>

#include "deam/amr.hpp"

namespace deam {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Normalized lexicon key: lowercase lemma, sense suffix stripped.
std::string lemma_key(std::string_view raw) {
  return lower(split_sense_suffix(raw).first);
}

bool retained_relation(std::string_view relation) {
  return std::any_of(std::begin(kLexiconRelations), std::end(kLexiconRelations),
                     [&](const char* r) { return relation == r; });
}

}  // namespace

AntonymLexicon load_lexicon(std::istream& in) {
  AntonymLexicon lexicon;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 3) {
      throw std::runtime_error("lexicon line " + std::to_string(line_number) +
                               ": expected 3 tab-separated fields, got " +
                               std::to_string(fields.size()));
    }
    const std::string& relation = fields[0];
    if (!retained_relation(relation)) continue;
    const std::string a = lemma_key(fields[1]);
    const std::string b = lemma_key(fields[2]);
    if (a.empty() || b.empty()) {
      throw std::runtime_error("lexicon line " + std::to_string(line_number) + ": empty lemma");
    }
    lexicon.entries[a].insert({b, relation});
    if (relation == "Antonym") lexicon.entries[b].insert({a, relation});
  }
  return lexicon;
}

AntonymLexicon load_lexicon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon file: " + path);
  try {
    return load_lexicon(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::set<std::string> antonyms_of(const AntonymLexicon& lexicon, std::string_view concept_label) {
  const auto [stem, suffix] = split_sense_suffix(concept_label);
  std::set<std::string> out;
  const auto it = lexicon.entries.find(lower(stem));
  if (it == lexicon.entries.end()) return out;
  for (const auto& [lemma, relation] : it->second) {
    out.insert(lemma + suffix);
  }
  return out;
}

}  // namespace deam
