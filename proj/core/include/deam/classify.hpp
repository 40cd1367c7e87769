#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "deam/dialogue.hpp"

namespace deam {

inline constexpr std::size_t kDefaultFeatureDim = std::size_t{1} << 18;

// Sparse hashed feature counts over a conversation. Buckets come from
// 64-bit FNV-1a truncated to log2(dim) bits; dim must be a power of two.
// Feature streams: concept unigrams/bigrams and role bigrams over the
// whole conversation (with [U:speaker] / [U] boundary markers so that
// utterance order matters), per-utterance depth buckets and sentence-unit
// counts, plus surface-text token n-grams when text is present.
struct FeatureVector {
  std::size_t dim = kDefaultFeatureDim;
  std::map<std::uint64_t, double> counts;  // bucket -> count, counts >= 1
};

FeatureVector featurize(const Conversation& conv, std::size_t dim = kDefaultFeatureDim);

struct TrainOptions {
  int epochs = 30;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
  std::size_t dim = kDefaultFeatureDim;
};

struct LinearModel {
  std::size_t dim = kDefaultFeatureDim;
  double bias = 0.0;
  std::vector<double> weights;  // length dim
};

// 1 for coherent, 0 for incoherent; throws std::invalid_argument on
// missing or unknown labels.
int label_value(const Conversation& conv);

double sigmoid(double z);

// Logistic regression by SGD over a per-epoch reshuffled example order
// (shuffle seeded by options.seed, so training is deterministic). Throws
// std::invalid_argument when all examples carry the same label.
LinearModel train(const std::vector<Conversation>& examples, const TrainOptions& options = {});
LinearModel train_features(const std::vector<std::pair<FeatureVector, int>>& examples,
                           const TrainOptions& options = {});

// Coherence score in (0, 1): sigmoid of the affine feature score.
double score(const LinearModel& model, const Conversation& conv);
double score_features(const LinearModel& model, const FeatureVector& features);

// Flat binary model format: magic bytes "DEAMLM1", then dim as a 64-bit
// little-endian integer, then bias and the dim weights as little-endian
// IEEE-754 doubles.
void save_model(const LinearModel& model, std::ostream& out);
LinearModel load_model(std::istream& in);
void save_model_file(const LinearModel& model, const std::string& path);
LinearModel load_model_file(const std::string& path);

// Dense logistic-regression objective over parameters [bias, w_0..w_{d-1}]
// (mean loss over the instances); the analytic gradient is checked against
// central finite differences in the test suite.
double logistic_loss(const std::vector<std::vector<double>>& xs, const std::vector<int>& ys,
                     const std::vector<double>& params);
std::vector<double> logistic_gradient(const std::vector<std::vector<double>>& xs,
                                      const std::vector<int>& ys,
                                      const std::vector<double>& params);

}  // namespace deam
