#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "deam/dialogue.hpp"
#include "deam/knowledge.hpp"
#include "deam/rng.hpp"

namespace deam {

// Canonical manipulation names as they appear in config `enabled` lists
// and in ManipulationRecord steps.
inline constexpr const char* kManipContradiction = "contradiction";
inline constexpr const char* kManipCoreference = "coreference";
inline constexpr const char* kManipIrrelevancy = "irrelevancy";
inline constexpr const char* kManipEngagement = "engagement";
inline constexpr const char* kSemanticManipulations[] = {
    kManipContradiction, kManipCoreference, kManipIrrelevancy, kManipEngagement};

// Baseline primitive names (same namespace: they share the record format).
inline constexpr const char* kBaselineShuffleTurns = "shuffle_turns";
inline constexpr const char* kBaselineShuffleSpeaker = "shuffle_speaker";
inline constexpr const char* kBaselineSwapHalves = "swap_halves";
inline constexpr const char* kBaselineInject = "inject_random_utterance";
inline constexpr const char* kBaselinePrimitives[] = {
    kBaselineShuffleTurns, kBaselineShuffleSpeaker, kBaselineSwapHalves, kBaselineInject};

enum class EngagementStrategy { question, deepest, arguments };

std::string to_string(EngagementStrategy strategy);
std::optional<EngagementStrategy> engagement_strategy_from_name(std::string_view name);

struct EngagementWeights {
  double question = 1.0;
  double deepest = 1.0;
  double arguments = 1.0;
};

struct ManipulationConfig {
  std::vector<std::string> enabled{kManipContradiction, kManipCoreference, kManipIrrelevancy,
                                   kManipEngagement};
  int min_ops = 1;
  int max_ops = 3;
  std::vector<std::string> pronouns{"i", "you", "he", "she", "it", "we", "they"};
  int coref_max_items = 3;
  int irrelevancy_min_items = 1;
  int irrelevancy_max_items = 3;
  bool irrelevancy_cross_conversation = false;
  int arguments_min_items = 1;
  int arguments_max_items = 3;
  EngagementWeights engagement_weights;
  std::vector<std::string> baseline_mix{kBaselineShuffleTurns, kBaselineShuffleSpeaker,
                                        kBaselineSwapHalves, kBaselineInject};

  // Throws std::invalid_argument on any invariant violation.
  void check() const;
};

nlohmann::json config_to_json(const ManipulationConfig& config);
ManipulationConfig config_from_json(const nlohmann::json& j);
ManipulationConfig load_config_file(const std::string& path);

// Outcome of planning one manipulation on a conversation: the edited
// conversation plus the steps that reproduce the edit.
struct ManipulationResult {
  Conversation conversation;
  std::vector<ManipulationStep> steps;
};

// Extra same-category concept donors for irrelevancy when the donor pool
// is widened beyond the conversation (sorted, unique).
struct DonorPool {
  std::vector<std::string> predicates;
  std::vector<std::string> nonpredicates;
};

// The four semantic manipulations. Each draws all random choices from
// `rng`, records them in the returned steps, and returns std::nullopt when
// no eligible target exists (the pipeline then resamples another
// manipulation). Hard contract violations throw.

std::optional<ManipulationResult> contradict(const Conversation& conv,
                                             const AntonymLexicon& lexicon, Rng& rng,
                                             const ManipulationConfig& config = {});

std::optional<ManipulationResult> coref_inconsistency(const Conversation& conv, Rng& rng,
                                                      const ManipulationConfig& config = {});

std::optional<ManipulationResult> irrelevancy(const Conversation& conv, Rng& rng,
                                              const ManipulationConfig& config = {},
                                              const DonorPool* extra_donors = nullptr);

std::optional<ManipulationResult> decrease_engagement(
    const Conversation& conv, Rng& rng, const ManipulationConfig& config = {},
    std::optional<EngagementStrategy> strategy = std::nullopt);

// Deterministic replay: applies one recorded step (or a whole record) to a
// conversation. No randomness is involved; every choice comes from the
// step parameters. Throws std::runtime_error when a step does not fit the
// conversation it is applied to.
Conversation apply_step(const Conversation& conv, const ManipulationStep& step);
Conversation apply_record(const Conversation& conv, const ManipulationRecord& record);

// Per-conversation seed: one SplitMix64 step applied to
// global_seed XOR fnv1a64(conversation_id). Identical for any job count.
std::uint64_t conversation_seed(std::uint64_t global_seed, std::string_view conversation_id);

// Number of manipulations for one conversation, uniform on
// [min_ops, max_ops].
int draw_op_count(Rng& rng, const ManipulationConfig& config);

struct PipelineOutcome {
  Conversation conversation;
  ManipulationRecord record;
  bool applied = false;  // false: nothing was applicable; conversation unchanged
};

// Samples `draw_op_count` distinct manipulations, applies them in sampled
// order (resampling replacements for inapplicable ones), labels the result
// incoherent and attaches the replay record.
PipelineOutcome apply_pipeline(const Conversation& conv, const ManipulationConfig& config,
                               const AntonymLexicon& lexicon, std::uint64_t global_seed,
                               const DonorPool* extra_donors = nullptr);

}  // namespace deam
