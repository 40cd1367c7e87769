#include "deam/baseline.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace deam {

namespace {

using nlohmann::json;

bool is_identity(const std::vector<std::size_t>& perm) {
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (perm[i] != i) return false;
  }
  return true;
}

// Uniform non-identity permutation of [0, n), n >= 2.
std::vector<std::size_t> non_identity_permutation(Rng& rng, std::size_t n) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    rng.shuffle(perm);
  } while (is_identity(perm));
  return perm;
}

Conversation unwrap(std::optional<ManipulationResult> result, const char* op) {
  if (!result.has_value()) {
    throw std::invalid_argument(std::string(op) + ": precondition unmet");
  }
  return std::move(result->conversation);
}

}  // namespace

std::optional<ManipulationResult> plan_shuffle_turns(const Conversation& conv, Rng& rng) {
  const std::size_t n = conv.utterances.size();
  if (n < 2) return std::nullopt;
  ManipulationStep step;
  step.name = kBaselineShuffleTurns;
  step.params = json{{"permutation", non_identity_permutation(rng, n)}};
  Conversation out = apply_step(conv, step);
  return ManipulationResult{std::move(out), {std::move(step)}};
}

std::optional<ManipulationResult> plan_shuffle_speaker(const Conversation& conv, Rng& rng) {
  // Speakers in first-appearance order; only those with >= 2 turns qualify.
  std::vector<std::string> speakers;
  for (const auto& utt : conv.utterances) {
    if (std::find(speakers.begin(), speakers.end(), utt.speaker) == speakers.end()) {
      speakers.push_back(utt.speaker);
    }
  }
  std::vector<std::string> eligible;
  for (const auto& s : speakers) {
    const auto turns = std::count_if(conv.utterances.begin(), conv.utterances.end(),
                                     [&](const Utterance& u) { return u.speaker == s; });
    if (turns >= 2) eligible.push_back(s);
  }
  if (eligible.empty()) return std::nullopt;

  const std::string speaker = eligible[rng.below(eligible.size())];
  const auto turns = static_cast<std::size_t>(
      std::count_if(conv.utterances.begin(), conv.utterances.end(),
                    [&](const Utterance& u) { return u.speaker == speaker; }));
  ManipulationStep step;
  step.name = kBaselineShuffleSpeaker;
  step.params = json{{"speaker", speaker}, {"permutation", non_identity_permutation(rng, turns)}};
  Conversation out = apply_step(conv, step);
  return ManipulationResult{std::move(out), {std::move(step)}};
}

std::optional<ManipulationResult> plan_swap_halves(const Conversation& conv) {
  if (conv.utterances.size() < 2) return std::nullopt;
  ManipulationStep step;
  step.name = kBaselineSwapHalves;
  Conversation out = apply_step(conv, step);
  return ManipulationResult{std::move(out), {std::move(step)}};
}

std::optional<ManipulationResult> plan_inject(const Conversation& conv,
                                              const std::vector<Conversation>& corpus, Rng& rng,
                                              std::optional<InjectMode> mode) {
  std::vector<const Conversation*> donors;
  for (const auto& other : corpus) {
    if (other.id != conv.id && !other.utterances.empty()) donors.push_back(&other);
  }
  if (donors.empty()) return std::nullopt;

  const InjectMode picked =
      mode.has_value() ? *mode : (rng.coin() ? InjectMode::insert : InjectMode::replace);
  const Conversation& donor_conv = *donors[rng.below(donors.size())];
  const std::size_t donor_index = rng.below(donor_conv.utterances.size());
  const Utterance& donor = donor_conv.utterances[donor_index];
  const std::size_t n = conv.utterances.size();
  const std::size_t position =
      picked == InjectMode::insert ? rng.below(n + 1) : rng.below(n);

  ManipulationStep step;
  step.name = kBaselineInject;
  step.utterance = position;
  step.params =
      json{{"mode", picked == InjectMode::insert ? "insert" : "replace"},
           {"position", position},
           {"donor",
            {{"speaker", donor.speaker},
             {"text", donor.text.empty() ? json() : json(donor.text)},
             {"amr", serialize(donor.amr, PenmanStyle::single_line)}}},
           {"donor_id", donor_conv.id},
           {"donor_index", donor_index}};
  Conversation out = apply_step(conv, step);
  return ManipulationResult{std::move(out), {std::move(step)}};
}

Conversation shuffle_turns(const Conversation& conv, Rng& rng) {
  return unwrap(plan_shuffle_turns(conv, rng), "shuffle_turns");
}

Conversation shuffle_speaker(const Conversation& conv, Rng& rng) {
  return unwrap(plan_shuffle_speaker(conv, rng), "shuffle_speaker");
}

Conversation swap_halves(const Conversation& conv) {
  return unwrap(plan_swap_halves(conv), "swap_halves");
}

Conversation inject_random_utterance(const Conversation& conv,
                                     const std::vector<Conversation>& corpus, Rng& rng,
                                     InjectMode mode) {
  return unwrap(plan_inject(conv, corpus, rng, mode), "inject_random_utterance");
}

PipelineOutcome apply_baseline_pipeline(const Conversation& conv,
                                        const std::vector<Conversation>& corpus,
                                        const ManipulationConfig& config,
                                        std::uint64_t global_seed) {
  config.check();
  if (conv.label == kLabelIncoherent) {
    throw std::invalid_argument("apply_baseline_pipeline: conversation already labeled incoherent");
  }

  const std::uint64_t seed = conversation_seed(global_seed, conv.id);
  Rng rng(seed);
  std::vector<std::string> order = config.baseline_mix;
  rng.shuffle(order);

  std::optional<ManipulationResult> result;
  for (const auto& name : order) {
    if (name == kBaselineShuffleTurns) {
      result = plan_shuffle_turns(conv, rng);
    } else if (name == kBaselineShuffleSpeaker) {
      result = plan_shuffle_speaker(conv, rng);
    } else if (name == kBaselineSwapHalves) {
      result = plan_swap_halves(conv);
    } else {
      result = plan_inject(conv, corpus, rng);
    }
    if (result.has_value()) break;
  }

  PipelineOutcome outcome;
  if (!result.has_value()) {
    outcome.conversation = conv;
    outcome.record = ManipulationRecord{conv.id, seed, {}};
    outcome.applied = false;
    return outcome;
  }
  Conversation out = std::move(result->conversation);
  outcome.record = ManipulationRecord{conv.id, seed, std::move(result->steps)};
  out.label = kLabelIncoherent;
  out.record = outcome.record;
  outcome.conversation = std::move(out);
  outcome.applied = true;
  return outcome;
}

}  // namespace deam
