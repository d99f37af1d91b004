#include "selfalign/pairgen.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <random>
#include <unordered_map>

#include "selfalign/errors.hpp"

namespace selfalign {

namespace {

void require_cap(std::size_t cap) {
  if (cap == 0) throw ConfigError("pair cap must be >= 1");
}

// Uniform subset of size `cap` (order preserved) from `items`.
template <typename T>
std::vector<T> trim(const std::vector<T>& items, std::size_t cap, std::mt19937_64& rng) {
  if (items.size() <= cap) return items;
  std::vector<T> kept;
  kept.reserve(cap);
  std::sample(items.begin(), items.end(), std::back_inserter(kept), cap, rng);
  return kept;
}

}  // namespace

PairList generate_pairs(const Ontology& ontology, std::size_t cap, std::uint64_t seed) {
  require_cap(cap);
  std::mt19937_64 rng(seed);
  PairList out;
  out.seed = seed;
  const auto& records = ontology.records();
  std::vector<std::pair<std::size_t, std::size_t>> combos;
  for (const auto& cui : ontology.concepts()) {
    const auto idx = ontology.names_of(cui);
    combos.clear();
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = a + 1; b < idx.size(); ++b) combos.emplace_back(idx[a], idx[b]);
    for (const auto& [i, j] : trim(combos, cap, rng))
      out.pairs.push_back({records[i].name, records[j].name, cui});
  }
  return out;
}

PairList generate_finetune_pairs(const MentionSet& mentions, const Ontology& ontology,
                                 std::size_t cap, std::uint64_t seed) {
  require_cap(cap);
  const auto& records = ontology.records();

  std::vector<PositivePair> all;
  std::vector<std::string> cui_order;
  std::unordered_map<std::string, std::vector<std::size_t>> by_cui;
  for (std::size_t m = 0; m < mentions.size(); ++m) {
    const auto& mention = mentions.mentions[m];
    for (const auto& cui : mention.gold) {
      if (!ontology.contains(cui)) throw UnknownConcept(m, cui);
      for (std::size_t r : ontology.names_of(cui)) {
        if (records[r].name == mention.text) continue;
        auto [it, inserted] = by_cui.try_emplace(cui);
        if (inserted) cui_order.push_back(cui);
        it->second.push_back(all.size());
        all.push_back({mention.text, records[r].name, cui});
      }
    }
  }

  std::mt19937_64 rng(seed);
  std::vector<char> keep(all.size(), 1);
  for (const auto& cui : cui_order) {
    const auto& idx = by_cui[cui];
    if (idx.size() <= cap) continue;
    for (std::size_t i : idx) keep[i] = 0;
    for (std::size_t i : trim(idx, cap, rng)) keep[i] = 1;
  }

  PairList out;
  out.seed = seed;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (keep[i]) out.pairs.push_back(std::move(all[i]));
  return out;
}

std::size_t batches_per_epoch(std::size_t n_pairs, std::size_t batch_pairs) {
  const std::size_t full = n_pairs / batch_pairs;
  return full + ((n_pairs % batch_pairs) >= 2 ? 1 : 0);
}

BatchIterator::BatchIterator(const PairList& pairs, std::size_t batch_pairs,
                             std::uint64_t epoch_seed)
    : pairs_(&pairs), order_(pairs.size()), batch_pairs_(batch_pairs) {
  if (batch_pairs < 2) throw ConfigError("batch_pairs must be >= 2");
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  std::mt19937_64 rng(epoch_seed);
  std::shuffle(order_.begin(), order_.end(), rng);
  chunks_ = batches_per_epoch(order_.size(), batch_pairs_);
}

std::optional<MiniBatch> BatchIterator::next() {
  if (cursor_ >= chunks_) return std::nullopt;
  const std::size_t begin = cursor_ * batch_pairs_;
  const std::size_t end = std::min(begin + batch_pairs_, order_.size());
  ++cursor_;

  MiniBatch batch;
  batch.names.reserve(2 * (end - begin));
  batch.labels.reserve(2 * (end - begin));
  for (std::size_t k = begin; k < end; ++k) {
    const auto& p = pairs_->pairs[order_[k]];
    batch.names.push_back(p.name1);
    batch.names.push_back(p.name2);
    batch.labels.push_back(p.cui);
    batch.labels.push_back(p.cui);
  }
  return batch;
}

void write_pairs(const PairList& pairs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  for (const auto& p : pairs.pairs) out << p.name1 << '\t' << p.name2 << '\t' << p.cui << '\n';
  if (!out) throw IoError(path.string(), "write failed");
}

PairList read_pairs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  PairList out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v(line);
    if (!v.empty() && v.back() == '\r') v.remove_suffix(1);
    if (v.empty()) continue;
    const auto fields = detail::split(v, '\t');
    if (fields.size() != 3) {
      throw MalformedLine(path.string(), line_no,
                          "expected 3 tab-separated columns, found " + std::to_string(fields.size()));
    }
    out.pairs.push_back({std::string(fields[0]), std::string(fields[1]), std::string(fields[2])});
  }
  return out;
}

}  // namespace selfalign
