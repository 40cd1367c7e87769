#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"

#include "deam/baseline.hpp"
#include "support/fixtures.hpp"
#include "support/generate.hpp"

using namespace deam;

namespace {

std::vector<std::string> canonical_multiset(const Conversation& conv) {
  std::vector<std::string> forms;
  for (const auto& u : conv.utterances) forms.push_back(u.speaker + "|" + canonical_form(u.amr));
  std::sort(forms.begin(), forms.end());
  return forms;
}

Conversation replay_steps(const Conversation& original, const std::vector<ManipulationStep>& steps) {
  Conversation out = original;
  for (const auto& step : steps) out = apply_step(out, step);
  return out;
}

}  // namespace

TEST_CASE("shuffle_turns: non-identity permutation preserving the turn multiset") {
  const Conversation conv = fixtures::golden_conversation();
  Rng seeder(11);
  for (int trial = 0; trial < 50; ++trial) {
    Rng rng(seeder.next());
    const Conversation shuffled = shuffle_turns(conv, rng);
    REQUIRE(shuffled.utterances.size() == conv.utterances.size());
    CHECK(canonical_multiset(shuffled) == canonical_multiset(conv));
    bool moved = false;
    for (std::size_t i = 0; i < conv.utterances.size(); ++i) {
      if (!(shuffled.utterances[i] == conv.utterances[i])) moved = true;
    }
    CHECK(moved);
  }
}

TEST_CASE("shuffle_turns: two turns force a swap; one turn is an error") {
  Conversation conv = fixtures::golden_conversation();
  conv.utterances.resize(2);
  Rng rng(1);
  const Conversation swapped = shuffle_turns(conv, rng);
  CHECK(swapped.utterances[0] == conv.utterances[1]);
  CHECK(swapped.utterances[1] == conv.utterances[0]);

  conv.utterances.resize(1);
  Rng rng2(1);
  CHECK_THROWS_AS((void)shuffle_turns(conv, rng2), std::invalid_argument);
  CHECK_FALSE(plan_shuffle_turns(conv, rng2).has_value());
}

TEST_CASE("shuffle_speaker: only the chosen speaker's turns move") {
  const Conversation conv = fixtures::golden_conversation();  // A,B,A,B
  Rng seeder(22);
  for (int trial = 0; trial < 50; ++trial) {
    Rng rng(seeder.next());
    auto result = plan_shuffle_speaker(conv, rng);
    REQUIRE(result.has_value());
    const Conversation& out = result->conversation;
    const std::string speaker = result->steps[0].params.at("speaker").get<std::string>();

    // Speaker sequence is position-invariant.
    for (std::size_t i = 0; i < conv.utterances.size(); ++i) {
      CHECK(out.utterances[i].speaker == conv.utterances[i].speaker);
      if (conv.utterances[i].speaker != speaker) {
        CHECK(out.utterances[i] == conv.utterances[i]);
      }
    }
    CHECK(canonical_multiset(out) == canonical_multiset(conv));
    // Non-identity within the chosen speaker (each speaker has exactly two
    // turns here, so they must have swapped).
    bool moved = false;
    for (std::size_t i = 0; i < conv.utterances.size(); ++i) {
      if (!(out.utterances[i] == conv.utterances[i])) moved = true;
    }
    CHECK(moved);
    CHECK(write_conversation_line(replay_steps(conv, result->steps)) ==
          write_conversation_line(out));
  }
}

TEST_CASE("shuffle_speaker: needs some speaker with at least two turns") {
  Conversation conv = fixtures::golden_conversation();
  conv.utterances.resize(2);  // A,B: one turn each
  Rng rng(3);
  CHECK_THROWS_AS((void)shuffle_speaker(conv, rng), std::invalid_argument);
  CHECK_FALSE(plan_shuffle_speaker(conv, rng).has_value());

  // A,B,A: only speaker A is eligible.
  Conversation aba = fixtures::golden_conversation();
  aba.utterances.resize(3);
  for (int trial = 0; trial < 20; ++trial) {
    Rng r(trial);
    auto result = plan_shuffle_speaker(aba, r);
    REQUIRE(result.has_value());
    CHECK(result->steps[0].params.at("speaker") == "A");
    CHECK(result->conversation.utterances[1] == aba.utterances[1]);
  }
}

TEST_CASE("swap_halves: ceil split, even involution") {
  Conversation five = fixtures::golden_conversation();
  Utterance extra = five.utterances[0];
  five.utterances.push_back(extra);  // u0..u4

  const Conversation swapped = swap_halves(five);
  REQUIRE(swapped.utterances.size() == 5);
  // [u0 u1 u2 | u3 u4] -> [u3 u4 u0 u1 u2]
  CHECK(swapped.utterances[0] == five.utterances[3]);
  CHECK(swapped.utterances[1] == five.utterances[4]);
  CHECK(swapped.utterances[2] == five.utterances[0]);
  CHECK(swapped.utterances[3] == five.utterances[1]);
  CHECK(swapped.utterances[4] == five.utterances[2]);

  const Conversation four = fixtures::golden_conversation();
  const Conversation once = swap_halves(four);
  CHECK(once.utterances[0] == four.utterances[2]);
  const Conversation twice = swap_halves(once);
  for (std::size_t i = 0; i < 4; ++i) CHECK(twice.utterances[i] == four.utterances[i]);

  auto planned = plan_swap_halves(four);
  REQUIRE(planned.has_value());
  CHECK(write_conversation_line(replay_steps(four, planned->steps)) ==
        write_conversation_line(planned->conversation));
  Conversation solo = four;
  solo.utterances.resize(1);
  CHECK_FALSE(plan_swap_halves(solo).has_value());
}

TEST_CASE("inject_random_utterance: donor comes from another conversation") {
  Rng corpus_rng(33);
  std::vector<Conversation> corpus = testsupport::structured_corpus(corpus_rng, 4, "pool");
  Conversation host = fixtures::golden_conversation();
  corpus.push_back(host);  // the host itself must never donate

  Rng seeder(44);
  for (int trial = 0; trial < 40; ++trial) {
    Rng rng(seeder.next());
    auto result = plan_inject(host, corpus, rng);
    REQUIRE(result.has_value());
    const ManipulationStep& step = result->steps[0];
    CHECK(step.name == kBaselineInject);
    CHECK(step.params.at("donor_id") != host.id);
    const std::string mode = step.params.at("mode").get<std::string>();
    const Conversation& out = result->conversation;
    if (mode == "insert") {
      CHECK(out.utterances.size() == host.utterances.size() + 1);
    } else {
      CHECK(mode == "replace");
      CHECK(out.utterances.size() == host.utterances.size());
    }
    // The spliced turn equals the recorded donor utterance.
    const std::size_t pos = step.params.at("position").get<std::size_t>();
    const Utterance& injected = out.utterances[pos];
    CHECK(injected.speaker == step.params.at("donor").at("speaker").get<std::string>());
    CHECK(canonical_form(injected.amr) ==
          canonical_form(parse(step.params.at("donor").at("amr").get<std::string>())));
    CHECK(write_conversation_line(replay_steps(host, result->steps)) ==
          write_conversation_line(out));
  }
}

TEST_CASE("inject_random_utterance: no external donors, no result") {
  const Conversation host = fixtures::golden_conversation();
  Rng rng(5);
  CHECK_FALSE(plan_inject(host, {host}, rng).has_value());
  CHECK_FALSE(plan_inject(host, {}, rng).has_value());
  Rng rng2(5);
  CHECK_THROWS_AS((void)inject_random_utterance(host, {host}, rng2, InjectMode::insert),
                  std::invalid_argument);
}

TEST_CASE("baseline pipeline: one primitive, deterministic, replayable") {
  Rng corpus_rng(55);
  const std::vector<Conversation> corpus = testsupport::structured_corpus(corpus_rng, 6, "bp");
  ManipulationConfig config;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const PipelineOutcome a = apply_baseline_pipeline(corpus[i], corpus, config, 777);
    const PipelineOutcome b = apply_baseline_pipeline(corpus[i], corpus, config, 777);
    REQUIRE(a.applied);
    CHECK(write_conversation_line(a.conversation) == write_conversation_line(b.conversation));
    REQUIRE(a.record.steps.size() == 1);
    const std::set<std::string> mix(config.baseline_mix.begin(), config.baseline_mix.end());
    CHECK(mix.count(a.record.steps[0].name) == 1);
    CHECK(a.conversation.label == kLabelIncoherent);
    CHECK(a.record.seed == conversation_seed(777, corpus[i].id));
    const Conversation replayed = apply_record(corpus[i], a.record);
    CHECK(write_conversation_line(replayed) == write_conversation_line(a.conversation));
  }
}

TEST_CASE("baseline pipeline: restricted mix is honored") {
  Rng corpus_rng(66);
  const std::vector<Conversation> corpus = testsupport::structured_corpus(corpus_rng, 3, "mx");
  ManipulationConfig config;
  config.baseline_mix = {kBaselineSwapHalves};
  const PipelineOutcome outcome = apply_baseline_pipeline(corpus[0], corpus, config, 1);
  REQUIRE(outcome.applied);
  CHECK(outcome.record.steps[0].name == kBaselineSwapHalves);
}

TEST_CASE("baseline pipeline: rejects incoherent input") {
  Conversation conv = fixtures::golden_conversation();
  conv.label = kLabelIncoherent;
  CHECK_THROWS_AS((void)apply_baseline_pipeline(conv, {conv}, {}, 1), std::invalid_argument);
}
