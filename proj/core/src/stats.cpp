#include "deam/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace deam {

namespace {

// Shortest decimal representation that round-trips the double.
std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, const std::string& where) {
  double value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw std::runtime_error(where + ": bad number '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    fields.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

}  // namespace

void validate_score_table(const ScoreTable& table, RangeProfile profile) {
  std::set<std::string> ids;
  for (const auto& row : table.rows) {
    if (!ids.insert(row.conversation_id).second) {
      throw std::runtime_error("score table: duplicate conversation id '" + row.conversation_id +
                               "'");
    }
    if (row.human_scores.empty()) {
      throw std::runtime_error("score table: row '" + row.conversation_id +
                               "' has no human scores");
    }
    if (row.aspect != "coherence" && row.aspect != "overall") {
      throw std::runtime_error("score table: row '" + row.conversation_id + "' has aspect '" +
                               row.aspect + "', expected coherence or overall");
    }
    if (profile == RangeProfile::none) continue;
    double lo = 0;
    double hi = 0;
    if (profile == RangeProfile::fed) {
      lo = 0;
      hi = row.aspect == "coherence" ? 2 : 4;
    } else {
      lo = 1;
      hi = row.aspect == "coherence" ? 3 : 5;
    }
    for (double s : row.human_scores) {
      if (s < lo || s > hi) {
        throw std::runtime_error("score table: row '" + row.conversation_id + "' score " +
                                 format_double(s) + " outside [" + format_double(lo) + ", " +
                                 format_double(hi) + "] for aspect " + row.aspect);
      }
    }
  }
}

ScoreTable read_score_table(std::istream& in) {
  ScoreTable table;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::string where = "score table line " + std::to_string(line_number);
    const auto fields = split(line, '\t');
    if (fields.size() != 4) {
      throw std::runtime_error(where + ": expected 4 tab-separated fields, got " +
                               std::to_string(fields.size()));
    }
    ScoreRow row;
    row.conversation_id = std::string(fields[0]);
    row.model_score = parse_double(fields[1], where);
    for (const auto& part : split(fields[2], ',')) {
      row.human_scores.push_back(parse_double(part, where));
    }
    row.aspect = std::string(fields[3]);
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_score_table(const ScoreTable& table, std::ostream& out) {
  for (const auto& row : table.rows) {
    out << row.conversation_id << '\t' << format_double(row.model_score) << '\t';
    for (std::size_t i = 0; i < row.human_scores.size(); ++i) {
      if (i != 0) out << ',';
      out << format_double(row.human_scores[i]);
    }
    out << '\t' << row.aspect << '\n';
  }
  if (!out) throw std::runtime_error("score table write failed");
}

ScoreTable load_score_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open score table: " + path);
  try {
    return read_score_table(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void save_score_table(const ScoreTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  write_score_table(table, out);
}

ScoreTable aggregate_annotations(const ScoreTable& table) {
  if (table.rows.empty()) throw std::invalid_argument("aggregate_annotations: empty table");
  ScoreTable out;
  for (const auto& row : table.rows) {
    if (row.human_scores.empty()) {
      throw std::invalid_argument("aggregate_annotations: row '" + row.conversation_id +
                                  "' has no human scores");
    }
    ScoreRow aggregated = row;
    const double mean =
        std::accumulate(row.human_scores.begin(), row.human_scores.end(), 0.0) /
        static_cast<double>(row.human_scores.size());
    aggregated.human_scores = {mean};
    out.rows.push_back(std::move(aggregated));
  }
  return out;
}

std::vector<double> average_ranks(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    // Positions i..j (0-based) share the mean of ranks i+1..j+1.
    const double shared = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) {
    throw std::invalid_argument("spearman: length mismatch");
  }
  if (xs.size() < 2) {
    throw std::invalid_argument("spearman: need at least 2 observations");
  }
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = static_cast<double>(rx.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0;
  double sxx = 0;
  double syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mx;
    const double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;  // constant input: rho undefined
  return sxy / std::sqrt(sxx * syy);
}

double accuracy(const std::vector<double>& scores, const std::vector<int>& labels,
                double threshold) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("accuracy: length mismatch");
  }
  if (scores.empty()) {
    throw std::invalid_argument("accuracy: need at least 1 observation");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted_coherent = scores[i] >= threshold;
    const bool is_coherent = labels[i] == 1;
    if (predicted_coherent == is_coherent) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(scores.size());
}

AccuracyMatrix cross_manipulation_matrix(const std::vector<NamedDataset>& train_sets,
                                         const std::vector<NamedDataset>& test_sets,
                                         const TrainOptions& hyper) {
  AccuracyMatrix matrix;
  auto note_balance = [&matrix](const NamedDataset& ds, const char* kind) {
    std::size_t pos = 0;
    std::size_t neg = 0;
    for (const auto& conv : ds.conversations) {
      (label_value(conv) == 1 ? pos : neg) += 1;
    }
    if (pos != neg) {
      matrix.warnings.push_back(std::string(kind) + " set '" + ds.name + "' is unbalanced (" +
                                std::to_string(pos) + " coherent vs " + std::to_string(neg) +
                                " incoherent)");
    }
  };
  for (const auto& ds : train_sets) note_balance(ds, "train");
  for (const auto& ds : test_sets) note_balance(ds, "test");

  // Featurize each test set once; every trained model shares hyper.dim.
  std::vector<std::vector<std::pair<FeatureVector, int>>> prepared_tests;
  for (const auto& ds : test_sets) {
    matrix.test_names.push_back(ds.name);
    std::vector<std::pair<FeatureVector, int>> prepared;
    prepared.reserve(ds.conversations.size());
    for (const auto& conv : ds.conversations) {
      prepared.emplace_back(featurize(conv, hyper.dim), label_value(conv));
    }
    prepared_tests.push_back(std::move(prepared));
  }

  for (const auto& ds : train_sets) {
    matrix.train_names.push_back(ds.name);
    const LinearModel model = train(ds.conversations, hyper);
    std::vector<double> row;
    for (const auto& prepared : prepared_tests) {
      std::vector<double> scores;
      std::vector<int> labels;
      scores.reserve(prepared.size());
      labels.reserve(prepared.size());
      for (const auto& [features, label] : prepared) {
        scores.push_back(score_features(model, features));
        labels.push_back(label);
      }
      row.push_back(accuracy(scores, labels));
    }
    matrix.cells.push_back(std::move(row));
  }
  return matrix;
}

std::string matrix_to_tsv(const AccuracyMatrix& matrix) {
  std::ostringstream out;
  out << "train\\test";
  for (const auto& name : matrix.test_names) out << '\t' << name;
  out << '\n';
  for (std::size_t i = 0; i < matrix.train_names.size(); ++i) {
    out << matrix.train_names[i];
    for (double cell : matrix.cells[i]) out << '\t' << format_double(cell);
    out << '\n';
  }
  return out.str();
}

CorpusStats corpus_stats(const std::vector<Conversation>& conversations) {
  CorpusStats stats;
  stats.conversations = conversations.size();
  if (conversations.empty()) return stats;
  std::size_t utterances = 0;
  std::size_t tokens = 0;
  for (const auto& conv : conversations) {
    utterances += conv.utterances.size();
    for (const auto& utt : conv.utterances) {
      if (!utt.text.empty()) {
        std::istringstream words(utt.text);
        std::string word;
        while (words >> word) ++tokens;
      } else {
        tokens += utt.amr.node_count();
      }
    }
  }
  stats.mean_conversation_length =
      static_cast<double>(utterances) / static_cast<double>(conversations.size());
  stats.mean_utterance_length =
      utterances == 0 ? 0.0 : static_cast<double>(tokens) / static_cast<double>(utterances);
  return stats;
}

}  // namespace deam
