#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>

namespace deam {

// Contradiction lexicon built from ConceptNet-style relation triples.
// Keys are lowercase lemmas without sense suffixes; each maps to the
// lemmas it can be contradicted with, tagged by relation name.
struct AntonymLexicon {
  // lemma -> set of (lemma, relation)
  std::map<std::string, std::set<std::pair<std::string, std::string>>> entries;

  bool empty() const { return entries.empty(); }
};

// Relations retained when loading; anything else is dropped. `Antonym`
// rows are indexed both directions, the rest only a -> b.
inline constexpr const char* kLexiconRelations[] = {"Antonym", "NotDesires", "NotCapableOf",
                                                    "NotHasProperty"};

// Reads `relation<TAB>lemma_a<TAB>lemma_b` rows; `#`-prefixed comment
// lines and blank lines are ignored. Throws std::runtime_error on rows
// with the wrong column count.
AntonymLexicon load_lexicon(std::istream& in);
AntonymLexicon load_lexicon_file(const std::string& path);

// Contradiction candidates for a concept. A trailing PropBank sense
// suffix `-NN` is stripped before the (case-insensitive) lookup and
// re-attached verbatim to every result: like-01 -> hate-01.
std::set<std::string> antonyms_of(const AntonymLexicon& lexicon, std::string_view concept_label);

}  // namespace deam
