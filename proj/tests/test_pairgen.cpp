#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "oracles.hpp"
#include "selfalign/errors.hpp"
#include "selfalign/pairgen.hpp"

using namespace selfalign;

namespace {

Ontology random_ontology(std::mt19937_64& rng, std::size_t n_cuis, std::size_t max_names) {
  std::vector<SynonymRecord> recs;
  for (std::size_t c = 0; c < n_cuis; ++c) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, max_names)(rng);
    for (std::size_t k = 0; k < n; ++k) recs.push_back({"C" + std::to_string(c), "n" + std::to_string(c) + "_" + std::to_string(k)});
  }
  return Ontology(recs);
}

std::set<std::pair<std::string, std::string>> names_of(const Ontology& o, const std::string& cui) {
  std::set<std::pair<std::string, std::string>> all;
  const auto idx = o.names_of(cui);
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b) all.insert({o.records()[idx[a]].name, o.records()[idx[b]].name});
  return all;
}

}  // namespace

TEST(GeneratePairs, ThreeNamesGiveAllThreePairs) {
  const std::vector<SynonymRecord> recs = {{"C1", "a"}, {"C1", "b"}, {"C1", "c"}};
  const PairList p = generate_pairs(Ontology(recs), 50, 0);
  const std::vector<PositivePair> want = {{"a", "b", "C1"}, {"a", "c", "C1"}, {"b", "c", "C1"}};
  EXPECT_EQ(p.pairs, want);
}

TEST(GeneratePairs, ElevenNamesCappedAtFifty) {
  std::vector<SynonymRecord> recs;
  for (int i = 0; i < 11; ++i) recs.push_back({"C1", "n" + std::to_string(i)});
  EXPECT_EQ(generate_pairs(Ontology(recs), 50, 1).size(), 50u);
}

TEST(GeneratePairs, SingletonConceptsEmitNothing) {
  const std::vector<SynonymRecord> recs = {{"C1", "a"}, {"C2", "b"}};
  EXPECT_TRUE(generate_pairs(Ontology(recs), 50, 0).empty());
}

TEST(GeneratePairs, CountAndValidityMatchBruteForce) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Ontology o = random_ontology(rng, 100, 20);
    const std::size_t cap = trial % 2 ? 50 : 7;
    const PairList pl = generate_pairs(o, cap, trial);
    std::map<std::string, std::set<std::pair<std::string, std::string>>> got;
    for (const auto& p : pl.pairs) {
      ASSERT_NE(p.name1, p.name2);
      ASSERT_TRUE(got[p.cui].insert({p.name1, p.name2}).second) << "duplicate pair";
    }
    for (const auto& cui : o.concepts()) {
      const auto all = names_of(o, cui);
      EXPECT_EQ(got[cui].size(), std::min(all.size(), cap)) << cui;
      for (const auto& pr : got[cui]) EXPECT_TRUE(all.count(pr)) << cui;
    }
  }
}

TEST(GeneratePairs, DeterministicPerSeedAndSeedMatters) {
  std::vector<SynonymRecord> recs;
  for (int i = 0; i < 15; ++i) recs.push_back({"C1", "n" + std::to_string(i)});
  const Ontology o(recs);
  EXPECT_EQ(generate_pairs(o, 50, 9).pairs, generate_pairs(o, 50, 9).pairs);
  EXPECT_NE(generate_pairs(o, 50, 9).pairs, generate_pairs(o, 50, 10).pairs);
}

TEST(GeneratePairs, TrimmingIsRoughlyUniform) {
  // 6 names -> 15 pairs, cap 5: each pair should be kept with probability 1/3.
  std::vector<SynonymRecord> recs;
  for (int i = 0; i < 6; ++i) recs.push_back({"C1", std::string(1, char('a' + i))});
  const Ontology o(recs);
  std::map<std::pair<std::string, std::string>, int> hits;
  const int trials = 3000;
  for (int s = 0; s < trials; ++s)
    for (const auto& p : generate_pairs(o, 5, s).pairs) ++hits[{p.name1, p.name2}];
  ASSERT_EQ(hits.size(), 15u);
  for (const auto& [pr, h] : hits) EXPECT_NEAR(double(h) / trials, 1.0 / 3.0, 0.05);
}

TEST(FinetunePairs, OnePerSynonym) {
  const std::vector<SynonymRecord> recs = {{"C1", "mi"}, {"C1", "myocardial infarction"}};
  MentionSet m;
  m.mentions.push_back({"heart attack", {"C1"}});
  const PairList p = generate_finetune_pairs(m, Ontology(recs), 50, 0);
  const std::vector<PositivePair> want = {{"heart attack", "mi", "C1"}, {"heart attack", "myocardial infarction", "C1"}};
  EXPECT_EQ(p.pairs, want);
}

TEST(FinetunePairs, SelfPairExcluded) {
  const std::vector<SynonymRecord> recs = {{"C1", "mi"}, {"C1", "heart attack"}};
  MentionSet m;
  m.mentions.push_back({"heart attack", {"C1"}});
  const PairList p = generate_finetune_pairs(m, Ontology(recs), 50, 0);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p.pairs[0].name2, "mi");
}

TEST(FinetunePairs, UnknownConceptNamesMentionIndex) {
  const std::vector<SynonymRecord> recs = {{"C1", "a"}};
  MentionSet m;
  m.mentions.push_back({"x", {"C1"}});
  m.mentions.push_back({"y", {"C9"}});
  try {
    generate_finetune_pairs(m, Ontology(recs), 50, 0);
    FAIL();
  } catch (const UnknownConcept& e) {
    EXPECT_EQ(e.mention_index(), 1u);
  }
}

TEST(FinetunePairs, MatchesProductOracleWhenUncapped) {
  std::mt19937_64 rng(21);
  const Ontology o = random_ontology(rng, 20, 6);
  MentionSet m;
  for (int i = 0; i < 50; ++i) {
    const auto& cuis = o.concepts();
    const std::string cui = cuis[rng() % cuis.size()];
    // Some mentions coincide with a synonym so self-pair removal is exercised.
    const std::string text = rng() % 4 == 0 ? o.records()[o.names_of(cui)[0]].name : "m" + std::to_string(i);
    m.mentions.push_back({text, {cui}});
  }
  std::multiset<std::tuple<std::string, std::string, std::string>> want;
  for (const auto& x : m.mentions)
    for (const auto& g : x.gold)
      for (auto idx : o.names_of(g))
        if (o.records()[idx].name != x.text) want.insert({x.text, o.records()[idx].name, g});
  const PairList p = generate_finetune_pairs(m, o, 100000, 3);
  std::multiset<std::tuple<std::string, std::string, std::string>> got;
  for (const auto& q : p.pairs) got.insert({q.name1, q.name2, q.cui});
  EXPECT_EQ(got, want);

  // With a cap every per-concept count is min(product count, cap) and a subset of it.
  const PairList capped = generate_finetune_pairs(m, o, 5, 3);
  std::map<std::string, std::size_t> want_n, got_n;
  for (const auto& [a, b, c] : want) ++want_n[c];
  for (const auto& q : capped.pairs) {
    ++got_n[q.cui];
    EXPECT_TRUE(want.count({q.name1, q.name2, q.cui}));
  }
  for (const auto& [c, n] : want_n) EXPECT_EQ(got_n[c], std::min<std::size_t>(n, 5)) << c;
}

namespace {
PairList numbered_pairs(std::size_t n) {
  PairList p;
  for (std::size_t i = 0; i < n; ++i)
    p.pairs.push_back({"a" + std::to_string(i), "b" + std::to_string(i), "C" + std::to_string(i)});
  return p;
}
}  // namespace

TEST(BatchIterator, TenPairsChunkIntoFourAndTwo) {
  const PairList p = numbered_pairs(10);
  BatchIterator it(p, 4, 1);
  std::vector<std::size_t> sizes;
  while (auto b = it.next()) sizes.push_back(b->size());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{8, 8, 4}));
  EXPECT_EQ(it.batch_count(), 3u);
  EXPECT_EQ(batches_per_epoch(10, 4), 3u);
}

TEST(BatchIterator, SinglePairRemainderDropped) {
  const PairList p = numbered_pairs(5);
  BatchIterator it(p, 4, 1);
  std::size_t n = 0;
  while (auto b = it.next()) {
    EXPECT_EQ(b->size(), 8u);
    ++n;
  }
  EXPECT_EQ(n, 1u);
  EXPECT_EQ(batches_per_epoch(5, 4), 1u);
}

TEST(BatchIterator, PairStructureAndPermutation) {
  const PairList p = numbered_pairs(37);
  for (std::uint64_t seed : {1ull, 2ull}) {
    BatchIterator it(p, 5, seed);
    std::multiset<std::string> seen;
    while (auto b = it.next()) {
      ASSERT_EQ(b->size() % 2, 0u);
      for (std::size_t k = 0; k < b->size(); k += 2) {
        EXPECT_EQ(b->labels[k], b->labels[k + 1]);
        seen.insert(b->names[k] + "|" + b->names[k + 1]);
      }
    }
    EXPECT_EQ(seen.size(), 37u);
    for (std::size_t i = 0; i < 37; ++i) EXPECT_EQ(seen.count("a" + std::to_string(i) + "|b" + std::to_string(i)), 1u);
  }
  auto order = [&](std::uint64_t s) {
    BatchIterator it(p, 5, s);
    std::vector<std::string> names;
    while (auto b = it.next()) names.insert(names.end(), b->names.begin(), b->names.end());
    return names;
  };
  EXPECT_EQ(order(4), order(4));
  EXPECT_NE(order(4), order(5));
}

TEST(BatchIterator, RejectsTinyBatches) { EXPECT_THROW(BatchIterator(numbered_pairs(3), 1, 0), ConfigError); }

class PairFiles : public ::testing::Test {
 protected:
  void SetUp() override { dir_ = oracle::scratch_dir("pairs"); }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(PairFiles, EmptyListRoundTrips) {
  write_pairs(PairList{}, dir_ / "p.tsv");
  EXPECT_EQ(std::filesystem::file_size(dir_ / "p.tsv"), 0u);
  EXPECT_TRUE(read_pairs(dir_ / "p.tsv").empty());
}

TEST_F(PairFiles, ThousandPairsRoundTrip) {
  std::mt19937_64 rng(8);
  PairList p;
  for (int i = 0; i < 1000; ++i)
    p.pairs.push_back({oracle::random_word(rng, 1, 12), oracle::random_word(rng, 1, 12) + " x", "C" + std::to_string(i % 37)});
  write_pairs(p, dir_ / "p.tsv");
  EXPECT_EQ(read_pairs(dir_ / "p.tsv").pairs, p.pairs);
}

TEST_F(PairFiles, TwoColumnLineIsMalformed) {
  std::ofstream(dir_ / "p.tsv") << "a\tb\tC1\nc\td\n";
  try {
    read_pairs(dir_ / "p.tsv");
    FAIL();
  } catch (const MalformedLine& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}
