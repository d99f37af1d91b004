// Parallel kernels against their serial references. Run with
// OMP_NUM_THREADS=n to see the scaling; on one core the pairs should be close.

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "selfalign/encoder.hpp"
#include "selfalign/linker.hpp"
#include "selfalign/metric.hpp"
#include "selfalign/reference.hpp"

using namespace selfalign;

namespace {

std::vector<std::string> names(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> len(4, 14), ch('a', 'z');
  std::vector<std::string> out(n);
  for (auto& s : out) {
    const int l = len(rng);
    for (int i = 0; i < l; ++i) s.push_back(char(ch(rng)));
    s += " " + s.substr(0, 3);
  }
  return out;
}

EncoderModel model() {
  EncoderConfig c;
  c.vocab_buckets = 32768;
  c.embed_dim = 64;
  c.seed = 1;
  return init_model(c);
}

Matrix embeddings(std::size_t rows) { return encode_batch(model(), names(rows, 2)); }

std::vector<std::string> labels(std::size_t rows) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < rows; ++i) out.push_back("C" + std::to_string(i / 2));
  return out;
}

void BM_Encode(benchmark::State& st) {
  const EncoderModel m = model();
  const auto batch = names(st.range(0), 3);
  for (auto _ : st) benchmark::DoNotOptimize(encode_batch(m, batch));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_EncodeReference(benchmark::State& st) {
  const EncoderModel m = model();
  const auto batch = names(st.range(0), 3);
  for (auto _ : st) benchmark::DoNotOptimize(reference::encode_batch(m, batch));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_Similarity(benchmark::State& st) {
  const Matrix x = embeddings(st.range(0));
  const auto l = labels(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(similarity_matrix(x, l));
}

void BM_SimilarityReference(benchmark::State& st) {
  const Matrix x = embeddings(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(reference::cosine_similarity(x));
}

void BM_Mine(benchmark::State& st) {
  const Matrix x = embeddings(st.range(0));
  const auto l = labels(st.range(0));
  const auto b = similarity_matrix(x, l);
  for (auto _ : st) benchmark::DoNotOptimize(mine_hard_pairs(b, 0.2));
}

void BM_MineReference(benchmark::State& st) {
  const Matrix x = embeddings(st.range(0));
  const auto l = labels(st.range(0));
  const auto b = similarity_matrix(x, l);
  const auto ids = dense_label_ids(l);
  const Matrix dist = distances_from_similarity(b.similarity);
  for (auto _ : st) benchmark::DoNotOptimize(reference::mine_hard_pairs(dist, ids, 0.2));
}

LinkIndex index_of(std::size_t n) {
  std::vector<SynonymRecord> recs;
  for (const auto& s : names(n, 4)) recs.push_back({"C" + std::to_string(recs.size()), s});
  return build_index(model(), Ontology(recs), 1024);
}

void BM_Topk(benchmark::State& st) {
  const LinkIndex idx = index_of(st.range(0));
  const auto q = idx.unit_embeddings.row(0);
  for (auto _ : st) benchmark::DoNotOptimize(topk_unit(idx, q, 10));
}

void BM_TopkReference(benchmark::State& st) {
  const LinkIndex idx = index_of(st.range(0));
  const auto q = idx.unit_embeddings.row(0);
  for (auto _ : st) benchmark::DoNotOptimize(reference::topk(idx.unit_embeddings, q, 10));
}

}  // namespace

BENCHMARK(BM_Encode)->Arg(256)->Arg(1024);
BENCHMARK(BM_EncodeReference)->Arg(256)->Arg(1024);
BENCHMARK(BM_Similarity)->Arg(64)->Arg(256);
BENCHMARK(BM_SimilarityReference)->Arg(64)->Arg(256);
BENCHMARK(BM_Mine)->Arg(32)->Arg(128);
BENCHMARK(BM_MineReference)->Arg(32)->Arg(128);
BENCHMARK(BM_Topk)->Arg(5000)->Arg(20000);
BENCHMARK(BM_TopkReference)->Arg(5000)->Arg(20000);

BENCHMARK_MAIN();
