#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "deam/dialogue.hpp"
#include "deam/rng.hpp"
#include "support/fixtures.hpp"
#include "support/generate.hpp"

namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("deam-cli-test-" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

CmdResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path out = scratch_dir() / ("out-" + std::to_string(counter));
  const fs::path err = scratch_dir() / ("err-" + std::to_string(counter));
  ++counter;
  const std::string command = std::string(DEAM_CLI_PATH) + " " + args + " > " +
                              out.string() + " 2> " + err.string();
  const int raw = std::system(command.c_str());
  CmdResult result;
  result.status = (raw == -1) ? -1 : WEXITSTATUS(raw);
  result.out = slurp(out);
  result.err = slurp(err);
  return result;
}

fs::path write_structured_corpus(const std::string& name, std::size_t n) {
  deam::Rng rng(2718);
  const auto corpus = testsupport::structured_corpus(rng, n, name);
  const fs::path path = scratch_dir() / (name + ".jsonl");
  deam::save_corpus(corpus, path.string());
  return path;
}

std::size_t count_lines(const std::string& text) {
  std::size_t lines = 0;
  for (const char c : text) {
    if (c == '\n') ++lines;
  }
  return lines;
}

}  // namespace

TEST_CASE("cli: usage errors exit with 2") {
  CHECK(run_cli("").status == 2);
  CHECK(run_cli("transmogrify").status == 2);
  CHECK(run_cli("validate --no-such-flag x").status == 2);
  const CmdResult help = run_cli("--help");
  CHECK(help.status == 0);
  CHECK(help.out.find("validate") != std::string::npos);
}

TEST_CASE("cli validate: accepts a good corpus, rejects a broken one") {
  const fs::path good = write_structured_corpus("valid", 3);
  const CmdResult ok = run_cli("validate --in " + good.string());
  CHECK(ok.status == 0);
  CHECK(ok.out.find("3 conversations valid") != std::string::npos);

  const fs::path bad = scratch_dir() / "broken.jsonl";
  {
    std::ofstream f(bad);
    f << R"({"id":"b1","label":null,"utterances":[{"speaker":"A","text":null,"amr":"(broken"}],"record":null})"
      << "\n";
  }
  const CmdResult fail = run_cli("validate --in " + bad.string());
  CHECK(fail.status == 1);
  CHECK(fail.err.find("b1") != std::string::npos);
}

TEST_CASE("cli manipulate: deterministic output, job count invisible") {
  const fs::path in = write_structured_corpus("manip", 8);
  const fs::path out1 = scratch_dir() / "manip-out1.jsonl";
  const fs::path out2 = scratch_dir() / "manip-out2.jsonl";
  const fs::path out3 = scratch_dir() / "manip-out3.jsonl";

  CHECK(run_cli("manipulate --in " + in.string() + " --out " + out1.string() + " --seed 42").status == 0);
  CHECK(run_cli("manipulate --in " + in.string() + " --out " + out2.string() + " --seed 42").status == 0);
  CHECK(run_cli("manipulate --in " + in.string() + " --out " + out3.string() +
                " --seed 42 --jobs 4").status == 0);

  const std::string bytes1 = slurp(out1);
  CHECK(!bytes1.empty());
  CHECK(bytes1 == slurp(out2));
  CHECK(bytes1 == slurp(out3));

  // Every output line is an incoherent conversation with a replay record.
  std::ifstream f(out1);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(f, line)) {
    const deam::Conversation conv = deam::read_conversation_line(line);
    CHECK(conv.label == deam::kLabelIncoherent);
    CHECK(!conv.record.steps.empty());
    ++lines;
  }
  CHECK(lines == 8);
}

TEST_CASE("cli manipulate: baseline mode applies exactly one primitive") {
  const fs::path in = write_structured_corpus("base", 5);
  const fs::path out = scratch_dir() / "base-out.jsonl";
  CHECK(run_cli("manipulate --mode baseline --in " + in.string() + " --out " + out.string() +
                " --seed 9").status == 0);
  std::ifstream f(out);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(f, line)) {
    const deam::Conversation conv = deam::read_conversation_line(line);
    CHECK(conv.record.steps.size() == 1);
    ++lines;
  }
  CHECK(lines == 5);
}

TEST_CASE("cli gen-dataset: balanced positives and negatives") {
  const fs::path in = write_structured_corpus("gen", 6);
  const fs::path out = scratch_dir() / "gen-out.jsonl";
  CHECK(run_cli("gen-dataset --in " + in.string() + " --out " + out.string() + " --seed 5").status == 0);

  std::ifstream f(out);
  std::string line;
  std::size_t coherent = 0, incoherent = 0;
  std::vector<deam::Conversation> all;
  while (std::getline(f, line)) {
    all.push_back(deam::read_conversation_line(line));
    if (all.back().label == deam::kLabelCoherent) ++coherent;
    if (all.back().label == deam::kLabelIncoherent) ++incoherent;
  }
  CHECK(all.size() == 12);
  CHECK(coherent == 6);
  CHECK(incoherent == 6);
  // Negatives follow their positive and carry a derived id.
  for (std::size_t i = 0; i + 1 < all.size(); i += 2) {
    CHECK(all[i].label == deam::kLabelCoherent);
    CHECK(all[i + 1].label == deam::kLabelIncoherent);
    CHECK(all[i + 1].id == all[i].id + "-neg");
    CHECK(all[i + 1].record.conversation_id == all[i].id);
  }
}

TEST_CASE("cli train-proxy and score: end-to-end loop") {
  const fs::path in = write_structured_corpus("loop", 10);
  const fs::path dataset = scratch_dir() / "loop-dataset.jsonl";
  const fs::path model = scratch_dir() / "loop-model.bin";
  const fs::path scores = scratch_dir() / "loop-scores.tsv";

  REQUIRE(run_cli("gen-dataset --in " + in.string() + " --out " + dataset.string() +
                  " --seed 3").status == 0);
  REQUIRE(run_cli("train-proxy --in " + dataset.string() + " --out " + model.string() +
                  " --dim 4096 --epochs 20").status == 0);
  CHECK(fs::exists(model));

  const CmdResult scored = run_cli("score --model " + model.string() + " --in " +
                                   dataset.string() + " --out " + scores.string());
  CHECK(scored.status == 0);
  std::ifstream f(scores);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(f, line)) {
    std::stringstream ss(line);
    std::string id, value, label;
    REQUIRE(std::getline(ss, id, '\t'));
    REQUIRE(std::getline(ss, value, '\t'));
    REQUIRE(std::getline(ss, label, '\t'));
    const double v = std::stod(value);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    CHECK((label == "coherent" || label == "incoherent"));
    ++rows;
  }
  CHECK(rows == 20);

  // Missing model file is a runtime failure, not a crash.
  CHECK(run_cli("score --model " + (scratch_dir() / "nope.bin").string() + " --in " +
                dataset.string()).status == 1);
}

TEST_CASE("cli stats: corpus summary layout") {
  const fs::path in = write_structured_corpus("stats", 4);
  const CmdResult result = run_cli("stats --in " + in.string());
  CHECK(result.status == 0);
  std::stringstream ss(result.out);
  std::string header, row;
  REQUIRE(std::getline(ss, header));
  REQUIRE(std::getline(ss, row));
  CHECK(header == "size\tavg_conversation_length\tavg_utterance_length");
  std::stringstream rs(row);
  std::string size_field;
  REQUIRE(std::getline(rs, size_field, '\t'));
  CHECK(size_field == "4");
}

TEST_CASE("cli eval-corr: spearman over aggregated annotations") {
  const fs::path table = scratch_dir() / "scores.tsv";
  {
    std::ofstream f(table);
    f << "c1\t0.1\t1,1\tcoherence\n"
      << "c2\t0.5\t2,2\tcoherence\n"
      << "c3\t0.9\t2,4\tcoherence\n";
  }
  const CmdResult result = run_cli("eval-corr --scores " + table.string());
  CHECK(result.status == 0);
  CHECK(result.out.find("rows\t3") != std::string::npos);
  CHECK(result.out.find("spearman\t1") != std::string::npos);

  const fs::path constant = scratch_dir() / "constant.tsv";
  {
    std::ofstream f(constant);
    f << "c1\t0.5\t1\tcoherence\n"
      << "c2\t0.5\t2\tcoherence\n";
  }
  const CmdResult undef = run_cli("eval-corr --scores " + constant.string());
  CHECK(undef.status == 0);
  CHECK(undef.out.find("spearman\tundefined") != std::string::npos);

  // Range profile enforcement: a FED coherence score above 2 is an error.
  const fs::path out_of_range = scratch_dir() / "range.tsv";
  {
    std::ofstream f(out_of_range);
    f << "c1\t0.5\t3\tcoherence\n"
      << "c2\t0.6\t1\tcoherence\n";
  }
  CHECK(run_cli("eval-corr --scores " + out_of_range.string() + " --profile fed").status == 1);
  CHECK(run_cli("eval-corr --scores " + out_of_range.string() + " --profile dstc9").status == 0);
}

TEST_CASE("cli cross-matrix: TSV with one row per train set") {
  const fs::path in = write_structured_corpus("xm", 8);
  const fs::path ds_a = scratch_dir() / "xm-a.jsonl";
  const fs::path ds_b = scratch_dir() / "xm-b.jsonl";
  REQUIRE(run_cli("gen-dataset --in " + in.string() + " --out " + ds_a.string() +
                  " --seed 1").status == 0);
  REQUIRE(run_cli("gen-dataset --mode baseline --in " + in.string() + " --out " + ds_b.string() +
                  " --seed 2").status == 0);

  const fs::path out = scratch_dir() / "xm-matrix.tsv";
  const CmdResult result =
      run_cli("cross-matrix --train sem=" + ds_a.string() + " --train base=" + ds_b.string() +
              " --test sem=" + ds_a.string() + " --test base=" + ds_b.string() + " --dim 4096" +
              " --out " + out.string());
  CHECK(result.status == 0);
  const std::string tsv = slurp(out);
  CHECK(tsv.rfind("train\\test\tsem\tbase\n", 0) == 0);
  CHECK(count_lines(tsv) == 3);
  for (const std::string& name : {std::string("sem"), std::string("base")}) {
    CHECK(tsv.find("\n" + name + "\t") != std::string::npos);
  }
}
