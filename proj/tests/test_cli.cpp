#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "selfalign/commands.hpp"
#include "selfalign/config.hpp"
#include "selfalign/linker.hpp"
#include "selfalign/synth.hpp"

#ifndef SELFALIGN_CLI_PATH
#error "SELFALIGN_CLI_PATH must point at the built CLI"
#endif

using namespace selfalign;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override { dir_ = oracle::scratch_dir("cli"); }
  void TearDown() override { fs::remove_all(dir_); }

  CliRun run(const std::string& args) {
    const fs::path o = dir_ / "stdout.txt", e = dir_ / "stderr.txt";
    const std::string cmd =
        std::string(SELFALIGN_CLI_PATH) + " " + args + " >" + o.string() + " 2>" + e.string();
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = oracle::slurp(o);
    r.err = oracle::slurp(e);
    return r;
  }

  fs::path write(const std::string& name, const std::string& body) {
    std::ofstream(dir_ / name, std::ios::binary) << body;
    return dir_ / name;
  }

  // Small synthetic benchmark on disk, plus a short config for it.
  void synth() {
    SyntheticSpec s;
    s.n_concepts = 30;
    s.edit_ops = 3;
    write_synthetic(generate_synthetic(s), dir_);
    write("run.conf",
          "seed = 9\nembed_dim = 16\nvocab_buckets = 4096\nepochs = 2\nbatch_pairs = 16\n"
          "learning_rate = 0.01\n");
  }

  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, ThreeSynonymConceptGivesThreePairs) {
  write("dict.tsv", "C1\taspirin\nC1\tacetylsalicylic acid\nC1\tASA\n");
  const CliRun r = run("prepare-pairs --dict " + p("dict.tsv") + " --out " + p("o"));
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string pairs = oracle::slurp(dir_ / "o" / "pairs.tsv");
  EXPECT_EQ(std::count(pairs.begin(), pairs.end(), '\n'), 3);
  EXPECT_TRUE(fs::exists(dir_ / "o" / "prepare-pairs.resolved.conf"));
}

TEST_F(Cli, MalformedDictionaryNamesTheLine) {
  write("dict.tsv", "C1\taspirin\nno tab here\n");
  const CliRun r = run("prepare-pairs --dict " + p("dict.tsv") + " --out " + p("o"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("MalformedLine"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find(":2"), std::string::npos) << r.err;
}

TEST_F(Cli, ExitCodesByCategory) {
  synth();
  // usage
  EXPECT_EQ(run("pretrain --dict " + p("dictionary.tsv") + " --loss fastap --out " + p("o")).code, 1);
  EXPECT_EQ(run("pretrain --no-such-flag").code, 1);
  EXPECT_EQ(run("evaluate --set bogus=1").code, 1);
  // data
  EXPECT_EQ(run("evaluate --checkpoint " + p("missing.ckpt") + " --dict " + p("dictionary.tsv") +
                " --mentions " + p("test_mentions.tsv") + " --out " + p("o"))
                .code,
            2);
  write("empty.tsv", "");
  EXPECT_EQ(run("evaluate --untrained --dict " + p("dictionary.tsv") + " --mentions " + p("empty.tsv") +
                " --out " + p("o"))
                .code,
            2);
  // numeric: a zero-initialized encoder has nothing to normalize
  const CliRun z = run("evaluate --untrained --set init_scale=0 --dict " + p("dictionary.tsv") + " --mentions " +
                    p("test_mentions.tsv") + " --out " + p("o"));
  EXPECT_EQ(z.code, 3);
  EXPECT_NE(z.err.find("ZeroVector"), std::string::npos) << z.err;
}

TEST_F(Cli, QueryKLargerThanDictionaryFails) {
  write("dict.tsv", "C1\taspirin\nC2\tibuprofen\n");
  const CliRun r = run("query --untrained --dict " + p("dict.tsv") + " --mention aspirin --k 3");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("ConfigError"), std::string::npos);
}

TEST_F(Cli, QueryMatchesLibraryRanking) {
  synth();
  const std::string conf = " --config " + p("run.conf");
  ASSERT_EQ(run("pretrain" + conf + " --dict " + p("dictionary.tsv") + " --out " + p("m")).code, 0);
  const CliRun r = run("query" + conf + " --checkpoint " + p("m/model.ckpt") + " --dict " + p("dictionary.tsv") +
                    " --mention 'some mention' --k 7");
  ASSERT_EQ(r.code, 0) << r.err;

  RunConfig c;
  apply_config_file(c, dir_ / "run.conf");
  c.checkpoint = p("m/model.ckpt");
  const EncoderModel m = load_or_init_model(c);
  const LinkIndex idx = build_index(m, load_dictionary(dir_ / "dictionary.tsv"), 64);
  const Prediction want = topk(idx, "some mention", m, 7);
  std::ostringstream expect;
  char sim[64];
  for (std::size_t i = 0; i < want.ranked.size(); ++i) {
    std::snprintf(sim, sizeof sim, "%.17g", want.ranked[i].similarity);
    expect << i + 1 << '\t' << want.ranked[i].cui << '\t' << want.ranked[i].name << '\t' << sim << '\n';
  }
  EXPECT_EQ(r.out, expect.str());
}

TEST_F(Cli, RerunsAreByteIdentical) {
  synth();
  const std::string conf = " --config " + p("run.conf");
  for (const char* o : {"a", "b"}) {
    ASSERT_EQ(run("pretrain" + conf + " --dict " + p("dictionary.tsv") + " --out " + p(o)).code, 0);
    ASSERT_EQ(run("evaluate" + conf + " --checkpoint " + p(std::string(o) + "/model.ckpt") + " --dict " +
                  p("dictionary.tsv") + " --mentions " + p("test_mentions.tsv") + " --out " + p(o))
                  .code,
              0);
  }
  for (const char* f : {"model.ckpt", "train_log.csv", "eval.json"}) {
    const std::string a = oracle::slurp(dir_ / "a" / f);
    ASSERT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, oracle::slurp(dir_ / "b" / f)) << f;
  }
  // resolved configs differ only in the out line
  const std::string ra = oracle::slurp(dir_ / "a" / "pretrain.resolved.conf");
  EXPECT_NE(ra.find("seed = 9\n"), std::string::npos) << ra;
  EXPECT_NE(ra.find("embed_dim = 16\n"), std::string::npos);
}

TEST_F(Cli, FlagsOverrideConfigFile) {
  synth();
  ASSERT_EQ(run("synth --config " + p("run.conf") + " --seed 4 --concepts 7 --out " + p("s")).code, 0);
  const std::string resolved = oracle::slurp(dir_ / "s" / "synth.resolved.conf");
  EXPECT_NE(resolved.find("seed = 4\n"), std::string::npos) << resolved;
  EXPECT_NE(resolved.find("synth_concepts = 7\n"), std::string::npos);
  EXPECT_EQ(load_dictionary(dir_ / "s" / "dictionary.tsv").concepts().size(), 7u);
}

TEST_F(Cli, EmbedWritesOneLinePerName) {
  synth();
  ASSERT_EQ(run("embed --untrained --config " + p("run.conf") + " --dict " + p("dictionary.tsv") + " --out " +
                p("e"))
                .code,
            0);
  const LinkIndex idx = read_embeddings(dir_ / "e" / "embeddings.tsv");
  EXPECT_EQ(idx.size(), load_dictionary(dir_ / "dictionary.tsv").size());
  EXPECT_EQ(idx.unit_embeddings.cols(), 16u);
}
