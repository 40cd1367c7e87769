#pragma once

#include <optional>
#include <vector>

#include "deam/manipulate.hpp"

namespace deam {

enum class InjectMode { insert, replace };

// Text-level negative-sampling primitives. These permute or splice whole
// utterances and never edit AMRs. Each throws std::invalid_argument when
// its precondition is unmet.

// Uniformly random non-identity permutation of the utterances.
Conversation shuffle_turns(const Conversation& conv, Rng& rng);

// Permutes one randomly chosen speaker's utterances among that speaker's
// positions; the other speakers' positions are untouched.
Conversation shuffle_speaker(const Conversation& conv, Rng& rng);

// [u1..um, um+1..un] -> [um+1..un, u1..um] with m = ceil(n/2).
Conversation swap_halves(const Conversation& conv);

// Splices one utterance drawn from a uniformly chosen *different*
// conversation, either inserted at a uniform position or replacing one.
Conversation inject_random_utterance(const Conversation& conv,
                                     const std::vector<Conversation>& corpus, Rng& rng,
                                     InjectMode mode);

// Step-recording planners used by the negative-sampling pipeline;
// std::nullopt when the precondition is unmet.
std::optional<ManipulationResult> plan_shuffle_turns(const Conversation& conv, Rng& rng);
std::optional<ManipulationResult> plan_shuffle_speaker(const Conversation& conv, Rng& rng);
std::optional<ManipulationResult> plan_swap_halves(const Conversation& conv);
std::optional<ManipulationResult> plan_inject(const Conversation& conv,
                                              const std::vector<Conversation>& corpus, Rng& rng,
                                              std::optional<InjectMode> mode = std::nullopt);

// Applies one primitive drawn uniformly from config.baseline_mix
// (resampling among the rest when one is inapplicable). Seeding, labeling
// and record semantics mirror apply_pipeline.
PipelineOutcome apply_baseline_pipeline(const Conversation& conv,
                                        const std::vector<Conversation>& corpus,
                                        const ManipulationConfig& config,
                                        std::uint64_t global_seed);

}  // namespace deam
