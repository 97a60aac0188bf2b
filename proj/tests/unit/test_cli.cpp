#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "decisive/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = decisive::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("decisive_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

const std::string kData = DECISIVE_TEST_DATA;

}  // namespace

TEST_F(Cli, OneHotRoundTrip) {
  const auto synth =
      run({"synth", "--kind", "one-hot:1.0", "--n", "100", "--classes", "5", "--seed", "1", "--output", path("f.csv")});
  ASSERT_EQ(synth.code, 0) << synth.err;
  const auto eval = run({"evaluate", "--input", path("f.csv")});
  EXPECT_EQ(eval.code, 0) << eval.err;
  EXPECT_NE(eval.out.find("prediction accuracy  1.000"), std::string::npos) << eval.out;
}

TEST_F(Cli, BinsZeroIsUsageError) {
  const auto r = run({"evaluate", "--input", kData + "/hand10.csv", "--bins", "0"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--bins"), std::string::npos) << r.err;
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"evaluate"}).code, 2);
  const auto g = run({"evaluate", "--input", kData + "/hand10.csv", "--gamma", "1.5"});
  EXPECT_EQ(g.code, 2);
  EXPECT_NE(g.err.find("--gamma"), std::string::npos) << g.err;
  const auto s = run({"sweep", "--input", kData + "/hand10.csv", "--gammas", "0.1,abc"});
  EXPECT_EQ(s.code, 2);
  EXPECT_NE(s.err.find("--gammas"), std::string::npos) << s.err;
  EXPECT_EQ(run({"synth", "--kind", "lukewarm", "--output", path("x.csv")}).code, 2);
}

TEST_F(Cli, GoldenHand10) {
  const auto r = run({"evaluate", "--input", kData + "/hand10.csv", "--format", "csv", "--bins", "2", "--gamma",
                      "0.005", "--output", path("r.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("r.json")), slurp(kData + "/hand10.golden.json"));
}

TEST_F(Cli, StrictValidationFailure) {
  {
    std::ofstream out(path("bad.csv"));
    out << "label,p0,p1\n0,0.5,0.5\n0,0.5,0.3\n";
  }
  const auto strict = run({"evaluate", "--input", path("bad.csv"), "--strict"});
  EXPECT_EQ(strict.code, 3);
  EXPECT_NE(strict.err.find("line 3"), std::string::npos) << strict.err;
  EXPECT_NE(strict.err.find("sum-out-of-tolerance"), std::string::npos) << strict.err;
  EXPECT_EQ(run({"evaluate", "--input", path("bad.csv")}).code, 0);
}

TEST_F(Cli, IoFailures) {
  EXPECT_EQ(run({"evaluate", "--input", path("missing.csv")}).code, 4);
  EXPECT_EQ(run({"evaluate", "--input", kData + "/hand10.csv", "--output", path("no/such/dir/r.json")}).code, 4);
  EXPECT_EQ(run({"plot", "--report", path("missing.json"), "--svg", path("p.svg")}).code, 4);
}

TEST_F(Cli, AllOutputsAndPlot) {
  const auto r = run({"evaluate", "--input", kData + "/hand10.csv", "--bins", "2", "--output", path("r.json"),
                      "--svg", path("r.svg"), "--tsv", path("r.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("r.tsv")).rfind("metric\treported\tmeasured\n", 0), 0u);
  const auto p = run({"plot", "--report", path("r.json"), "--svg", path("p.svg")});
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_EQ(slurp(path("p.svg")), slurp(path("r.svg")));
}

TEST_F(Cli, Sweep) {
  // The default grid ends at gamma 0, which leaves no width for the 1.0 singularity.
  const auto zero = run({"sweep", "--input", kData + "/hand10.csv", "--bins", "2"});
  EXPECT_EQ(zero.code, 2);
  EXPECT_NE(zero.err.find("gamma = 0"), std::string::npos) << zero.err;

  const auto r = run({"sweep", "--input", kData + "/hand10.csv", "--bins", "2", "--gammas", "0.05,0.01,0.005,0.001",
                      "--output", path("s.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("s.tsv")), r.out);
  std::istringstream in(r.out);
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  EXPECT_EQ(lines, 5u);
}

TEST_F(Cli, SynthJsonlAndDeterminism) {
  const std::vector<std::string> args{"synth", "--kind", "temperature:0.5", "--n", "200", "--seed", "9",
                                      "--output", path("a.jsonl")};
  ASSERT_EQ(run(args).code, 0);
  auto again = args;
  again.back() = path("b.jsonl");
  ASSERT_EQ(run(again).code, 0);
  EXPECT_EQ(slurp(path("a.jsonl")), slurp(path("b.jsonl")));
  EXPECT_EQ(slurp(path("a.jsonl")).rfind("{\"label\":", 0), 0u);
  EXPECT_EQ(run({"evaluate", "--input", path("a.jsonl"), "--strict"}).code, 0);
}

TEST_F(Cli, HelpListsFlagsWithDefaults) {
  const auto top = run({"--help"});
  EXPECT_EQ(top.code, 0);
  for (const char* sub : {"evaluate", "sweep", "synth", "plot"}) EXPECT_NE(top.out.find(sub), std::string::npos);

  const auto eval = run({"evaluate", "--help"});
  EXPECT_EQ(eval.code, 0);
  for (const char* flag : {"--input", "--format", "--gamma", "--bins", "--output", "--svg", "--tsv", "--strict",
                           "--correct-decisions-only", "--prob-sum-tolerance", "--value-epsilon", "--threads"})
    EXPECT_NE(eval.out.find(flag), std::string::npos) << flag;
  EXPECT_NE(eval.out.find("0.005"), std::string::npos);
  EXPECT_NE(eval.out.find("20"), std::string::npos);

  const auto sweep = run({"sweep", "--help"});
  EXPECT_NE(sweep.out.find("0.05,0.01,0.005,0.001,0"), std::string::npos);

  const auto synth = run({"synth", "--help"});
  for (const char* flag : {"--kind", "--n", "--classes", "--seed", "--alpha", "--beta", "--output"})
    EXPECT_NE(synth.out.find(flag), std::string::npos) << flag;
  EXPECT_NE(synth.out.find("calibrated"), std::string::npos);

  const auto plot = run({"plot", "--help"});
  EXPECT_NE(plot.out.find("--report"), std::string::npos);
  EXPECT_NE(plot.out.find("--svg"), std::string::npos);
}
