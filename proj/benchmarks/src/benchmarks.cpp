#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "deam/classify.hpp"
#include "deam/manipulate.hpp"
#include "deam/stats.hpp"

namespace {

using namespace deam;

const char* kPenman = R"((m / multi-sentence
      :snt1 (u / use-02
            :ARG0 (ii / i)
            :ARG1 (n / name
                  :op1 "Sesame"
                  :op2 "Street")
            :time (y / young
                  :domain (p / person
                        :ARG0-of (h / have-rel-role-91
                              :ARG1 ii
                              :ARG2 (k / kid)))))
      :snt2 (l / like-01
            :ARG0 (ii2 / i)
            :ARG1 (p2 / person
                  :name (n2 / name
                        :op1 "Oscar"
                        :op2 "the"
                        :op3 "Grouch")))
      :snt3 (s / seem-01
            :ARG1 (r / realistic-03
                  :domain (h2 / he)))))";

Conversation sample_conversation() {
  Conversation conv;
  conv.id = "bench-1";
  const char* speakers[] = {"A", "B", "A", "B"};
  const char* graphs[] = {
      "(w / want-01 :ARG0 (ii / i) :ARG1 (d / dog :mod (b / big)))",
      kPenman,
      "(s / see-01 :ARG0 (y / you) :ARG1 (c / cat :quant 3) :polarity -)",
      "(k / know-01 :ARG0 (h / he) :ARG1 (t / truth :poss (s / she)))",
  };
  for (int i = 0; i < 4; ++i) {
    Utterance u;
    u.speaker = speakers[i];
    u.amr = parse(graphs[i]);
    conv.utterances.push_back(std::move(u));
  }
  return conv;
}

void BM_Parse(benchmark::State& state) {
  const std::string text = kPenman;
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse(text));
  }
}
BENCHMARK(BM_Parse);

void BM_Serialize(benchmark::State& state) {
  const AmrGraph g = parse(kPenman);
  for (auto _ : state) {
    benchmark::DoNotOptimize(serialize(g, PenmanStyle::multiline));
  }
}
BENCHMARK(BM_Serialize);

void BM_CanonicalForm(benchmark::State& state) {
  const AmrGraph g = parse(kPenman);
  for (auto _ : state) {
    benchmark::DoNotOptimize(canonical_form(g));
  }
}
BENCHMARK(BM_CanonicalForm);

void BM_Validate(benchmark::State& state) {
  const AmrGraph g = parse(kPenman);
  for (auto _ : state) {
    benchmark::DoNotOptimize(validate(g));
  }
}
BENCHMARK(BM_Validate);

void BM_ApplyPipeline(benchmark::State& state) {
  const Conversation conv = sample_conversation();
  AntonymLexicon lexicon;
  lexicon.entries["want"].insert({"hate", "Antonym"});
  lexicon.entries["see"].insert({"ignore", "Antonym"});
  lexicon.entries["know"].insert({"doubt", "Antonym"});
  const ManipulationConfig config;
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(apply_pipeline(conv, config, lexicon, seed++));
  }
}
BENCHMARK(BM_ApplyPipeline);

void BM_Featurize(benchmark::State& state) {
  const Conversation conv = sample_conversation();
  const std::size_t dim = std::size_t{1} << 18;
  for (auto _ : state) {
    benchmark::DoNotOptimize(featurize(conv, dim));
  }
}
BENCHMARK(BM_Featurize);

void BM_Spearman(benchmark::State& state) {
  Rng rng(99);
  std::vector<double> xs(200), ys(200);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs[i] = static_cast<double>(rng.below(40));
    ys[i] = static_cast<double>(rng.below(40));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(spearman(xs, ys));
  }
}
BENCHMARK(BM_Spearman);

}  // namespace

BENCHMARK_MAIN();
