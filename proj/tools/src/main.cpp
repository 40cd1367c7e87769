// Batch front end for the dialogue-manipulation toolkit: corpus linting,
// negative-sample generation, proxy-classifier training/scoring, rank
// correlation and the cross-manipulation accuracy matrix.

#include <atomic>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "deam/baseline.hpp"
#include "deam/classify.hpp"
#include "deam/dialogue.hpp"
#include "deam/knowledge.hpp"
#include "deam/manipulate.hpp"
#include "deam/stats.hpp"

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Writes to a file, or to stdout when path is "-".
void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

// Runs fn(i) for i in [0, n) on `jobs` threads; results are collected in
// index order, so output bytes do not depend on the job count.
std::vector<std::string> run_ordered(std::size_t n, int jobs,
                                     const std::function<std::string(std::size_t)>& fn) {
  std::vector<std::string> out(n);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  constexpr std::size_t kChunk = 16;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(jobs));
  for (int t = 0; t < jobs; ++t) {
    workers.emplace_back([&] {
      for (;;) {
        const std::size_t begin = cursor.fetch_add(kChunk);
        if (begin >= n) return;
        const std::size_t end = std::min(n, begin + kChunk);
        for (std::size_t i = begin; i < end; ++i) {
          try {
            out[i] = fn(i);
          } catch (...) {
            const std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
            return;
          }
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
  return out;
}

struct ManipulateOptions {
  std::string mode = "deam";
  std::string config_path;
  std::string lexicon_path;
  std::string in_path;
  std::string out_path = "-";
  std::uint64_t seed = 0;
  int jobs = 1;
};

deam::ManipulationConfig resolve_config(const ManipulateOptions& opts) {
  deam::ManipulationConfig config;
  if (!opts.config_path.empty()) config = deam::load_config_file(opts.config_path);
  config.check();
  return config;
}

deam::AntonymLexicon resolve_lexicon(const ManipulateOptions& opts) {
  if (opts.lexicon_path.empty()) return {};
  return deam::load_lexicon_file(opts.lexicon_path);
}

deam::DonorPool corpus_donor_pool(const std::vector<deam::Conversation>& corpus) {
  std::set<std::string> predicates;
  std::set<std::string> others;
  for (const auto& conv : corpus) {
    for (const auto& utt : conv.utterances) {
      const deam::AmrGraph& g = utt.amr;
      std::set<std::string> arg_op_targets;
      for (const auto& e : g.edges) {
        if (e.role.starts_with(":ARG") || e.role.starts_with(":op")) {
          arg_op_targets.insert(e.target);
        }
      }
      for (const auto& var : deam::traversal_order(g)) {
        const std::string& c = *g.concept_of(var);
        if (deam::is_predicate_concept(c)) {
          predicates.insert(c);
        } else if (arg_op_targets.count(var) != 0) {
          others.insert(c);
        }
      }
    }
  }
  return {{predicates.begin(), predicates.end()}, {others.begin(), others.end()}};
}

int run_validate(const std::string& in_path) {
  const auto corpus = deam::load_corpus(in_path);
  std::size_t violations = 0;
  for (const auto& conv : corpus) {
    for (std::size_t i = 0; i < conv.utterances.size(); ++i) {
      const auto report = deam::validate(conv.utterances[i].amr);
      for (const auto& v : report.violations) {
        ++violations;
        std::cerr << conv.id << " utterance " << i << ": " << v.code << " (" << v.subject
                  << "): " << v.message << '\n';
      }
    }
  }
  if (violations != 0) {
    std::cerr << violations << " violations\n";
    return 1;
  }
  std::cout << corpus.size() << " conversations valid\n";
  return 0;
}

int run_manipulate(const ManipulateOptions& opts, bool balanced_dataset) {
  const auto config = resolve_config(opts);
  const auto lexicon = resolve_lexicon(opts);
  const auto corpus = deam::load_corpus(opts.in_path);
  deam::DonorPool pool;
  const deam::DonorPool* pool_ptr = nullptr;
  if (config.irrelevancy_cross_conversation) {
    pool = corpus_donor_pool(corpus);
    pool_ptr = &pool;
  }

  std::atomic<std::size_t> unmanipulated{0};
  const auto lines = run_ordered(corpus.size(), opts.jobs, [&](std::size_t i) {
    deam::Conversation conv = corpus[i];
    if (conv.label.empty()) conv.label = deam::kLabelCoherent;
    const deam::PipelineOutcome outcome =
        opts.mode == "baseline"
            ? deam::apply_baseline_pipeline(conv, corpus, config, opts.seed)
            : deam::apply_pipeline(conv, config, lexicon, opts.seed, pool_ptr);
    if (!outcome.applied) unmanipulated.fetch_add(1);
    if (!balanced_dataset) {
      return deam::write_conversation_line(outcome.conversation);
    }
    deam::Conversation negative = outcome.conversation;
    negative.id = conv.id + "-neg";
    return deam::write_conversation_line(conv) + "\n" +
           deam::write_conversation_line(negative);
  });

  std::string text;
  for (const auto& line : lines) {
    text += line;
    text += '\n';
  }
  write_text(opts.out_path, text);
  if (unmanipulated.load() != 0) {
    std::cerr << "warning: " << unmanipulated.load()
              << " conversations had no applicable manipulation and were left unchanged\n";
  }
  return 0;
}

int run_train_proxy(const std::string& in_path, const std::string& model_path,
                    const deam::TrainOptions& options) {
  const auto corpus = deam::load_corpus(in_path);
  const deam::LinearModel model = deam::train(corpus, options);
  deam::save_model_file(model, model_path);
  std::size_t pos = 0;
  for (const auto& conv : corpus) pos += static_cast<std::size_t>(deam::label_value(conv));
  std::cout << "trained on " << corpus.size() << " conversations (" << pos << " coherent, "
            << corpus.size() - pos << " incoherent)\n";
  return 0;
}

int run_score(const std::string& model_path, const std::string& in_path,
              const std::string& out_path) {
  const deam::LinearModel model = deam::load_model_file(model_path);
  const auto corpus = deam::load_corpus(in_path);
  std::string text;
  for (const auto& conv : corpus) {
    text += conv.id;
    text += '\t';
    text += format_double(deam::score(model, conv));
    text += '\t';
    text += conv.label.empty() ? "-" : conv.label;
    text += '\n';
  }
  write_text(out_path, text);
  return 0;
}

int run_eval_corr(const std::string& scores_path, const std::string& profile_name) {
  const deam::ScoreTable table = deam::load_score_table(scores_path);
  deam::RangeProfile profile = deam::RangeProfile::none;
  if (profile_name == "fed") profile = deam::RangeProfile::fed;
  if (profile_name == "dstc9") profile = deam::RangeProfile::dstc9;
  deam::validate_score_table(table, profile);
  const deam::ScoreTable aggregated = deam::aggregate_annotations(table);
  std::vector<double> model_scores;
  std::vector<double> human_scores;
  for (const auto& row : aggregated.rows) {
    model_scores.push_back(row.model_score);
    human_scores.push_back(row.human_scores.front());
  }
  const auto rho = deam::spearman(model_scores, human_scores);
  std::cout << "rows\t" << aggregated.rows.size() << '\n';
  std::cout << "spearman\t" << (rho.has_value() ? format_double(*rho) : "undefined") << '\n';
  return 0;
}

std::vector<deam::NamedDataset> load_named_datasets(const std::vector<std::string>& specs,
                                                    const char* what) {
  std::vector<deam::NamedDataset> datasets;
  for (const auto& spec : specs) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw std::runtime_error(std::string(what) + " expects NAME=PATH, got '" + spec + "'");
    }
    datasets.push_back({spec.substr(0, eq), deam::load_corpus(spec.substr(eq + 1))});
  }
  return datasets;
}

int run_cross_matrix(const std::vector<std::string>& train_specs,
                     const std::vector<std::string>& test_specs, const std::string& out_path,
                     const deam::TrainOptions& options) {
  const auto train_sets = load_named_datasets(train_specs, "--train");
  const auto test_sets = load_named_datasets(test_specs, "--test");
  const deam::AccuracyMatrix matrix =
      deam::cross_manipulation_matrix(train_sets, test_sets, options);
  for (const auto& warning : matrix.warnings) std::cerr << "warning: " << warning << '\n';
  write_text(out_path, deam::matrix_to_tsv(matrix));
  return 0;
}

int run_stats(const std::string& in_path) {
  const auto corpus = deam::load_corpus(in_path);
  const deam::CorpusStats stats = deam::corpus_stats(corpus);
  std::cout << "size\tavg_conversation_length\tavg_utterance_length\n";
  std::cout << stats.conversations << '\t' << format_double(stats.mean_conversation_length)
            << '\t' << format_double(stats.mean_utterance_length) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic dialogue manipulation toolkit"};
  app.require_subcommand(1);
  int rc = 0;

  // validate
  std::string validate_in;
  auto* cmd_validate = app.add_subcommand("validate", "Lint a corpus file");
  cmd_validate->add_option("--in", validate_in, "corpus file")->required();
  cmd_validate->callback([&] { rc = run_validate(validate_in); });

  // manipulate / gen-dataset
  ManipulateOptions manip;
  auto add_manipulate_options = [&](CLI::App* cmd) {
    cmd->add_option("--mode", manip.mode, "manipulation family")
        ->check(CLI::IsMember({"deam", "baseline"}));
    cmd->add_option("--config", manip.config_path, "manipulation config (JSON)");
    cmd->add_option("--lexicon", manip.lexicon_path, "contradiction lexicon (TSV)");
    cmd->add_option("--seed", manip.seed, "global random seed");
    cmd->add_option("--jobs", manip.jobs, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--in", manip.in_path, "input corpus")->required();
    cmd->add_option("--out", manip.out_path, "output corpus ('-' = stdout)");
  };
  auto* cmd_manipulate =
      app.add_subcommand("manipulate", "Rewrite every conversation into a negative sample");
  add_manipulate_options(cmd_manipulate);
  cmd_manipulate->callback([&] { rc = run_manipulate(manip, false); });

  auto* cmd_gen = app.add_subcommand(
      "gen-dataset", "Emit a balanced corpus: each positive followed by its negative");
  add_manipulate_options(cmd_gen);
  cmd_gen->callback([&] { rc = run_manipulate(manip, true); });

  // train-proxy
  std::string train_in;
  std::string train_model;
  deam::TrainOptions train_options;
  auto add_train_options = [](CLI::App* cmd, deam::TrainOptions& options) {
    cmd->add_option("--epochs", options.epochs, "training epochs")->check(CLI::PositiveNumber);
    cmd->add_option("--learning-rate", options.learning_rate, "SGD learning rate");
    cmd->add_option("--seed", options.seed, "training shuffle seed");
    cmd->add_option("--dim", options.dim, "hashed feature dimensionality (power of two)");
  };
  auto* cmd_train = app.add_subcommand("train-proxy", "Train the proxy coherence classifier");
  cmd_train->add_option("--in", train_in, "labeled corpus")->required();
  cmd_train->add_option("--out", train_model, "model file")->required();
  add_train_options(cmd_train, train_options);
  cmd_train->callback([&] { rc = run_train_proxy(train_in, train_model, train_options); });

  // score
  std::string score_model;
  std::string score_in;
  std::string score_out = "-";
  auto* cmd_score = app.add_subcommand("score", "Score conversations with a trained model");
  cmd_score->add_option("--model", score_model, "model file")->required();
  cmd_score->add_option("--in", score_in, "corpus file")->required();
  cmd_score->add_option("--out", score_out, "TSV output ('-' = stdout)");
  cmd_score->callback([&] { rc = run_score(score_model, score_in, score_out); });

  // eval-corr
  std::string corr_scores;
  std::string corr_profile = "none";
  auto* cmd_corr = app.add_subcommand("eval-corr", "Spearman correlation report");
  cmd_corr->add_option("--scores", corr_scores, "score table (TSV)")->required();
  cmd_corr->add_option("--profile", corr_profile, "human score range profile")
      ->check(CLI::IsMember({"none", "fed", "dstc9"}));
  cmd_corr->callback([&] { rc = run_eval_corr(corr_scores, corr_profile); });

  // cross-matrix
  std::vector<std::string> matrix_train;
  std::vector<std::string> matrix_test;
  std::string matrix_out = "-";
  deam::TrainOptions matrix_options;
  auto* cmd_matrix =
      app.add_subcommand("cross-matrix", "Train/test accuracy matrix across datasets");
  cmd_matrix->add_option("--train", matrix_train, "NAME=PATH train dataset")->required();
  cmd_matrix->add_option("--test", matrix_test, "NAME=PATH test dataset")->required();
  cmd_matrix->add_option("--out", matrix_out, "matrix TSV output ('-' = stdout)");
  add_train_options(cmd_matrix, matrix_options);
  cmd_matrix->callback(
      [&] { rc = run_cross_matrix(matrix_train, matrix_test, matrix_out, matrix_options); });

  // stats
  std::string stats_in;
  auto* cmd_stats = app.add_subcommand("stats", "Corpus statistics");
  cmd_stats->add_option("--in", stats_in, "corpus file")->required();
  cmd_stats->callback([&] { rc = run_stats(stats_in); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help and friends
      return app.exit(e);
    }
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return rc;
}
