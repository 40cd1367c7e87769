#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "deam/classify.hpp"
#include "deam/dialogue.hpp"

namespace deam {

// One scored conversation next to its human judgments.
struct ScoreRow {
  std::string conversation_id;
  double model_score = 0.0;
  std::vector<double> human_scores;  // nonempty
  std::string aspect;                // "coherence" | "overall"
};

struct ScoreTable {
  std::vector<ScoreRow> rows;
};

// Declared human-score ranges: FED coherence 0-2 / overall 0-4,
// DSTC9 coherence 1-3 / overall 1-5.
enum class RangeProfile { none, fed, dstc9 };

// Structural checks (unique ids, nonempty scores, known aspect) plus range
// checks under the given profile. Throws std::runtime_error on violation.
void validate_score_table(const ScoreTable& table, RangeProfile profile = RangeProfile::none);

// TSV, one row per line:
// conversation_id<TAB>model_score<TAB>human_scores(comma-separated)<TAB>aspect
ScoreTable read_score_table(std::istream& in);
void write_score_table(const ScoreTable& table, std::ostream& out);
ScoreTable load_score_table(const std::string& path);
void save_score_table(const ScoreTable& table, const std::string& path);

// Replaces each row's human scores by their arithmetic mean. Throws on an
// empty table or a row without scores.
ScoreTable aggregate_annotations(const ScoreTable& table);

// 1-based ranks; ties share the mean of the ranks they occupy.
std::vector<double> average_ranks(const std::vector<double>& xs);

// Pearson correlation of average-fractional ranks. Lengths must match and
// be >= 2 (std::invalid_argument otherwise); a constant input makes rho
// undefined and yields std::nullopt, never 0.
std::optional<double> spearman(const std::vector<double>& xs, const std::vector<double>& ys);

// Fraction of rows where (score >= threshold) matches label 1 (coherent).
double accuracy(const std::vector<double>& scores, const std::vector<int>& labels,
                double threshold = 0.5);

struct NamedDataset {
  std::string name;
  std::vector<Conversation> conversations;
};

struct AccuracyMatrix {
  std::vector<std::string> train_names;
  std::vector<std::string> test_names;
  std::vector<std::vector<double>> cells;  // cells[train][test]
  std::vector<std::string> warnings;       // e.g. unbalanced datasets
};

// Trains one proxy classifier per train set (same hyperparameters and
// seed for every cell) and reports its accuracy on every test set.
// Unbalanced datasets produce warnings; single-class train sets throw.
AccuracyMatrix cross_manipulation_matrix(const std::vector<NamedDataset>& train_sets,
                                         const std::vector<NamedDataset>& test_sets,
                                         const TrainOptions& hyper = {});

// TSV with a `train\test` header row and one row per train set.
std::string matrix_to_tsv(const AccuracyMatrix& matrix);

// Corpus-level descriptive statistics. Utterance length counts surface
// tokens when text is present and AMR nodes otherwise.
struct CorpusStats {
  std::size_t conversations = 0;
  double mean_conversation_length = 0.0;  // utterances per conversation
  double mean_utterance_length = 0.0;     // tokens per utterance
};

CorpusStats corpus_stats(const std::vector<Conversation>& conversations);

}  // namespace deam
