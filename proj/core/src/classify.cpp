#include "deam/classify.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "deam/rng.hpp"

namespace deam {

namespace {

void check_dim(std::size_t dim) {
  if (dim == 0 || (dim & (dim - 1)) != 0) {
    throw std::invalid_argument("feature dimensionality must be a power of two");
  }
}

void bump(FeatureVector& v, std::string_view key) {
  v.counts[fnv1a64(key) & (v.dim - 1)] += 1.0;
}

void add_stream(FeatureVector& v, const std::vector<std::string>& stream, const char* uni,
                const char* bi) {
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (uni != nullptr) bump(v, std::string(uni) + stream[i]);
    if (bi != nullptr && i + 1 < stream.size()) {
      bump(v, std::string(bi) + stream[i] + "|" + stream[i + 1]);
    }
  }
}

std::vector<std::string> text_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!current.empty()) tokens.push_back(std::move(current)), current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    const int c = in.get();
    if (c == std::istream::traits_type::eof()) {
      throw std::runtime_error("model file truncated");
    }
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

void put_f64(std::ostream& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, sizeof bits);
  put_u64(out, bits);
}

double get_f64(std::istream& in) {
  const std::uint64_t bits = get_u64(in);
  double d;
  std::memcpy(&d, &bits, sizeof d);
  return d;
}

constexpr char kModelMagic[] = "DEAMLM1";  // 7 bytes on disk

double affine_score(const LinearModel& model, const FeatureVector& features) {
  double z = model.bias;
  for (const auto& [bucket, count] : features.counts) {
    z += model.weights[bucket] * count;
  }
  return z;
}

}  // namespace

FeatureVector featurize(const Conversation& conv, std::size_t dim) {
  check_dim(dim);
  FeatureVector v;
  v.dim = dim;

  std::vector<std::string> concept_stream;
  std::vector<std::string> role_stream;
  std::vector<std::string> word_stream;
  for (const auto& utt : conv.utterances) {
    const AmrGraph& g = utt.amr;
    concept_stream.push_back("[U:" + utt.speaker + "]");
    role_stream.push_back("[U]");
    for (const auto& var : traversal_order(g)) {
      concept_stream.push_back(*g.concept_of(var));
      for (const auto& a : g.attributes) {
        if (a.source == var) role_stream.push_back(a.role);
      }
      for (const auto& e : g.edges) {
        if (e.source == var) role_stream.push_back(e.role);
      }
    }
    bump(v, "depth:" + std::to_string(std::min(depth(g), 8)));
    bump(v, "snts:" + std::to_string(sentence_units(g).size()));
    if (!utt.text.empty()) {
      word_stream.push_back("[U]");
      for (auto& tok : text_tokens(utt.text)) word_stream.push_back(std::move(tok));
    }
  }
  add_stream(v, concept_stream, "c1:", "c2:");
  add_stream(v, role_stream, nullptr, "r2:");
  add_stream(v, word_stream, "t1:", "t2:");
  return v;
}

int label_value(const Conversation& conv) {
  if (conv.label == kLabelCoherent) return 1;
  if (conv.label == kLabelIncoherent) return 0;
  throw std::invalid_argument("conversation '" + conv.id + "' is unlabeled");
}

double sigmoid(double z) {
  if (z >= 0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

LinearModel train_features(const std::vector<std::pair<FeatureVector, int>>& examples,
                           const TrainOptions& options) {
  check_dim(options.dim);
  if (examples.empty()) throw std::invalid_argument("train: no examples");
  bool has_pos = false;
  bool has_neg = false;
  for (const auto& [features, label] : examples) {
    if (features.dim != options.dim) {
      throw std::invalid_argument("train: feature dimensionality mismatch");
    }
    (label != 0 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) {
    throw std::invalid_argument("train: both labels must be present");
  }

  LinearModel model;
  model.dim = options.dim;
  model.weights.assign(options.dim, 0.0);

  Rng rng(options.seed);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t idx : order) {
      const auto& [features, label] = examples[idx];
      const double p = sigmoid(affine_score(model, features));
      const double g = p - static_cast<double>(label);
      model.bias -= options.learning_rate * g;
      for (const auto& [bucket, count] : features.counts) {
        model.weights[bucket] -= options.learning_rate * g * count;
      }
    }
  }
  return model;
}

LinearModel train(const std::vector<Conversation>& examples, const TrainOptions& options) {
  std::vector<std::pair<FeatureVector, int>> prepared;
  prepared.reserve(examples.size());
  for (const auto& conv : examples) {
    prepared.emplace_back(featurize(conv, options.dim), label_value(conv));
  }
  return train_features(prepared, options);
}

double score_features(const LinearModel& model, const FeatureVector& features) {
  if (features.dim != model.dim) {
    throw std::invalid_argument("score: feature dimensionality mismatch");
  }
  return sigmoid(affine_score(model, features));
}

double score(const LinearModel& model, const Conversation& conv) {
  return score_features(model, featurize(conv, model.dim));
}

void save_model(const LinearModel& model, std::ostream& out) {
  if (model.weights.size() != model.dim) {
    throw std::invalid_argument("save_model: weight vector does not match dim");
  }
  out.write(kModelMagic, 7);
  put_u64(out, model.dim);
  put_f64(out, model.bias);
  for (double w : model.weights) put_f64(out, w);
  if (!out) throw std::runtime_error("model write failed");
}

LinearModel load_model(std::istream& in) {
  char magic[7];
  in.read(magic, 7);
  if (in.gcount() != 7 || std::memcmp(magic, kModelMagic, 7) != 0) {
    throw std::runtime_error("not a model file (bad magic)");
  }
  LinearModel model;
  model.dim = get_u64(in);
  check_dim(model.dim);
  model.bias = get_f64(in);
  model.weights.resize(model.dim);
  for (auto& w : model.weights) w = get_f64(in);
  if (!std::isfinite(model.bias) ||
      std::any_of(model.weights.begin(), model.weights.end(),
                  [](double w) { return !std::isfinite(w); })) {
    throw std::runtime_error("model file contains non-finite weights");
  }
  return model;
}

void save_model_file(const LinearModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
  save_model(model, out);
}

LinearModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  try {
    return load_model(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

namespace {

void check_instances(const std::vector<std::vector<double>>& xs, const std::vector<int>& ys,
                     const std::vector<double>& params) {
  if (xs.size() != ys.size() || xs.empty()) {
    throw std::invalid_argument("instances and labels must align and be nonempty");
  }
  for (const auto& x : xs) {
    if (x.size() + 1 != params.size()) {
      throw std::invalid_argument("parameter vector must be [bias, weights...]");
    }
  }
}

double margin(const std::vector<double>& x, const std::vector<double>& params) {
  double z = params[0];
  for (std::size_t j = 0; j < x.size(); ++j) z += params[j + 1] * x[j];
  return z;
}

}  // namespace

double logistic_loss(const std::vector<std::vector<double>>& xs, const std::vector<int>& ys,
                     const std::vector<double>& params) {
  check_instances(xs, ys, params);
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double z = margin(xs[i], params);
    // log(1 + e^z) - y z, computed without overflow for |z| large.
    const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    total += softplus - static_cast<double>(ys[i]) * z;
  }
  return total / static_cast<double>(xs.size());
}

std::vector<double> logistic_gradient(const std::vector<std::vector<double>>& xs,
                                      const std::vector<int>& ys,
                                      const std::vector<double>& params) {
  check_instances(xs, ys, params);
  std::vector<double> grad(params.size(), 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double g = sigmoid(margin(xs[i], params)) - static_cast<double>(ys[i]);
    grad[0] += g;
    for (std::size_t j = 0; j < xs[i].size(); ++j) grad[j + 1] += g * xs[i][j];
  }
  for (auto& v : grad) v /= static_cast<double>(xs.size());
  return grad;
}

}  // namespace deam
