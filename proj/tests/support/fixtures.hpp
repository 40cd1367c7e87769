#pragma once

// Golden dialogue fixture: a four-turn conversation about a children's
// television show, plus the expected result of a fixed manipulation script
// (concept rewrite, pronoun swap, question-unit removal, contradicted-clone
// insertion).  Expected graphs are compared canonically, so variable names
// here only need to be unique within each graph.

#include <cstddef>
#include <string>
#include <vector>

#include "deam/amr.hpp"
#include "deam/dialogue.hpp"
#include "deam/manipulate.hpp"

namespace fixtures {

inline const char* kSpeakers[4] = {"A", "B", "A", "B"};

inline const char* kTexts[4] = {
    "Have you watched Sesame Street?",
    "I used to when my kids were young. I liked Oscar the Grouch. He seemed realistic.",
    "He was one of my favorite characters as well. Why is he green though? I've always wondered that.",
    "He was once orange though.",
};

inline const char* kOriginalPenman[4] = {
    R"((w / watch-01
      :ARG0 (y / you)
      :ARG1 (b / broadcast-program
            :name (n / name
                  :op1 "Sesame"
                  :op2 "Street"))
      :polarity (a / amr-unknown)))",

    R"((m / multi-sentence
      :snt1 (u / use-02
            :ARG0 (ii / i)
            :time (y / young
                  :domain (p / person
                        :ARG0-of (h / have-rel-role-91
                              :ARG1 ii
                              :ARG2 (k / kid)))))
      :snt2 (l / like-01
            :ARG0 (ii2 / i)
            :ARG1 (p2 / person
                  :name (n / name
                        :op1 "Oscar"
                        :op2 "the"
                        :op3 "Grouch")))
      :snt3 (s / seem-01
            :ARG1 (r / realistic-03
                  :ARG1 (h2 / he)))))",

    R"((m / multi-sentence
      :snt1 (ii / include-91
            :ARG1 (h / he)
            :ARG2 (c / character
                  :ARG1-of (f / favor-01
                        :ARG0 (ii2 / i)))
            :mod (a / as-well))
      :snt2 (h2 / have-concession-91
            :ARG1 (g / green-02
                  :ARG1 (h3 / he)
                  :ARG1-of (c2 / cause-01
                        :ARG0 (a2 / amr-unknown))))
      :snt3 (w / wonder-01
            :ARG0 (ii3 / i)
            :ARG1 (t / that)
            :time (a3 / always))))",

    R"((h / have-concession-91
      :ARG1 (o / orange
            :domain (h2 / he)
            :time (o2 / once))))",
};

// Expected graphs after the scripted manipulation sequence below.
inline const char* kManipulatedPenman[4] = {
    R"((w / listen-01
      :ARG0 (y / you)
      :ARG1 (b / broadcast-program
            :name (n / name
                  :op1 "Sesame"
                  :op2 "Street"))
      :polarity (a / amr-unknown)))",

    R"((m / multi-sentence
      :snt1 (u / use-02
            :ARG0 (ii / i)
            :time (y / young
                  :domain (p / person
                        :ARG0-of (h / have-rel-role-91
                              :ARG1 ii
                              :ARG2 (k / kid)))))
      :snt2 (l / like-01
            :ARG0 (ii2 / i)
            :ARG1 (p2 / person
                  :name (n / name
                        :op1 "Oscar"
                        :op2 "the"
                        :op3 "Grouch")))
      :snt3 (s / seem-01
            :ARG1 (r / realistic-03
                  :ARG1 (h2 / he)))))",

    R"((m / multi-sentence
      :snt1 (ii / include-91
            :ARG1 (h / they)
            :ARG2 (c / character
                  :ARG1-of (f / favor-01
                        :ARG0 (ii2 / i)))
            :mod (a / as-well))
      :snt2 (w / wonder-01
            :ARG0 (ii3 / i)
            :ARG1 (t / that)
            :time (a3 / always))))",

    R"((m / multi-sentence
      :snt1 (h / have-concession-91
            :ARG1 (o / orange
                  :domain (h2 / he)
                  :time (o2 / once)))
      :snt2 (u / use-02
            :ARG0 (ii / i)
            :time (y / young
                  :domain (p / person
                        :ARG0-of (h3 / have-rel-role-91
                              :ARG1 ii
                              :ARG2 (k / kid)))))
      :snt3 (h4 / hate-01
            :ARG0 (ii2 / i)
            :ARG1 (p2 / person
                  :name (n / name
                        :op1 "Oscar"
                        :op2 "the"
                        :op3 "Grouch")))
      :snt4 (s / seem-01
            :polarity -
            :ARG1 (r / realistic-03
                  :ARG1 (h5 / he)))))",
};

inline deam::Conversation golden_conversation() {
  deam::Conversation conv;
  conv.id = "golden-1";
  conv.label = deam::kLabelCoherent;
  for (std::size_t i = 0; i < 4; ++i) {
    deam::Utterance utt;
    utt.speaker = kSpeakers[i];
    utt.text = kTexts[i];
    utt.amr = deam::parse(kOriginalPenman[i]);
    conv.utterances.push_back(std::move(utt));
  }
  return conv;
}

// The scripted steps that transform golden_conversation() into the graphs in
// kManipulatedPenman: rewrite watch-01 to an unrelated predicate, swap a
// pronoun, drop the question sentence unit, and append contradicted clones of
// every sentence unit of utterance 1 onto utterance 3.
inline std::vector<deam::ManipulationStep> golden_steps() {
  using deam::ManipulationStep;
  using nlohmann::json;
  std::vector<ManipulationStep> steps;

  ManipulationStep irr;
  irr.name = deam::kManipIrrelevancy;
  irr.utterance = 0;
  irr.touched = {"w"};
  irr.params = json{{"from", "watch-01"}, {"to", "listen-01"}};
  steps.push_back(std::move(irr));

  ManipulationStep coref;
  coref.name = deam::kManipCoreference;
  coref.utterance = 2;
  coref.touched = {"h"};
  coref.params = json{{"from", "he"}, {"to", "they"}};
  steps.push_back(std::move(coref));

  ManipulationStep eng;
  eng.name = deam::kManipEngagement;
  eng.utterance = 2;
  eng.touched = {"h2"};
  eng.params = json{{"strategy", "question"}, {"unit", 2}};
  steps.push_back(std::move(eng));

  ManipulationStep con;
  con.name = deam::kManipContradiction;
  con.utterance = 3;
  con.params = json{{"source", 1},
                    {"units", json::array({json{{"unit", 2}, {"action", "antonym"}, {"to", "hate-01"}},
                                           json{{"unit", 3}, {"action", "add_polarity"}}})}};
  steps.push_back(std::move(con));

  return steps;
}

// Convenience: every fixture graph (original and manipulated) as PENMAN text.
inline std::vector<std::string> all_fixture_penman() {
  std::vector<std::string> all;
  for (const char* s : kOriginalPenman) all.emplace_back(s);
  for (const char* s : kManipulatedPenman) all.emplace_back(s);
  return all;
}

}  // namespace fixtures
