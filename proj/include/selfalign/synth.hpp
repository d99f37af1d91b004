#ifndef SELFALIGN_SYNTH_HPP_
#define SELFALIGN_SYNTH_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include "selfalign/ontology.hpp"

namespace selfalign {

// Desk-scale stand-in for a synonym dictionary: random multi-word concept
// names whose synonyms are seeded edit perturbations of the canonical name.
struct SyntheticSpec {
  std::size_t n_concepts = 200;
  std::size_t synonyms_per_concept = 6;
  std::size_t edit_ops = 2;
  std::size_t holdout_per_concept = 1;
  std::uint64_t seed = 0;

  /// Throws ConfigError unless synonyms_per_concept > holdout_per_concept >= 1.
  void validate() const;
};

struct SyntheticData {
  Ontology dictionary;  // (synonyms - holdout) names per concept, canonical first
  MentionSet train;     // holdout fresh perturbations per concept, for fine-tuning
  MentionSet test;      // the held-out synonyms
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// Writes dictionary.tsv, train_mentions.tsv and test_mentions.tsv into `dir`.
void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir);

}  // namespace selfalign

#endif  // SELFALIGN_SYNTH_HPP_
