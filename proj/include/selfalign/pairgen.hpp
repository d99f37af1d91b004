#ifndef SELFALIGN_PAIRGEN_HPP_
#define SELFALIGN_PAIRGEN_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "selfalign/ontology.hpp"

namespace selfalign {

struct PositivePair {
  std::string name1;
  std::string name2;
  std::string cui;

  bool operator==(const PositivePair&) const = default;
};

struct PairList {
  std::vector<PositivePair> pairs;
  std::uint64_t seed = 0;  // not persisted in the TSV

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

/// Pair-structured batch: names[2k] and names[2k+1] are synonyms sharing labels[2k].
struct MiniBatch {
  std::vector<std::string> names;
  std::vector<std::string> labels;

  std::size_t size() const { return names.size(); }
};

inline constexpr std::size_t kDefaultPairCap = 50;

/// All synonym pairs per concept; concepts with more than `cap` pairs are
/// trimmed to a uniform random subset of size `cap`. Concepts come out in
/// first-appearance order, pairs in (i, j) index order within a concept.
PairList generate_pairs(const Ontology& ontology, std::size_t cap, std::uint64_t seed);

/// (mention, synonym, gold) for every gold concept's synonyms, self-pairs
/// excluded, capped per concept. Throws UnknownConcept.
PairList generate_finetune_pairs(const MentionSet& mentions, const Ontology& ontology,
                                 std::size_t cap, std::uint64_t seed);

/// Shuffles the pair list under `epoch_seed` and hands out pair-structured
/// batches of `batch_pairs` pairs. A trailing chunk is kept only if it holds
/// at least two pairs.
class BatchIterator {
 public:
  BatchIterator(const PairList& pairs, std::size_t batch_pairs, std::uint64_t epoch_seed);

  std::optional<MiniBatch> next();
  std::size_t batch_count() const { return chunks_; }

 private:
  const PairList* pairs_;
  std::vector<std::size_t> order_;
  std::size_t batch_pairs_;
  std::size_t chunks_ = 0;
  std::size_t cursor_ = 0;
};

/// Number of batches BatchIterator yields for `n_pairs` pairs.
std::size_t batches_per_epoch(std::size_t n_pairs, std::size_t batch_pairs);

/// `name1<TAB>name2<TAB>cui` per line.
void write_pairs(const PairList& pairs, const std::filesystem::path& path);
PairList read_pairs(const std::filesystem::path& path);

}  // namespace selfalign

#endif  // SELFALIGN_PAIRGEN_HPP_
