#ifndef SELFALIGN_LINKER_HPP_
#define SELFALIGN_LINKER_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "selfalign/encoder.hpp"
#include "selfalign/matrix.hpp"
#include "selfalign/ontology.hpp"

namespace selfalign {

/// Unit embeddings of every dictionary name; row i is ontology.records()[i].
struct LinkIndex {
  Matrix unit_embeddings;
  std::vector<std::string> names;
  std::vector<std::string> cuis;

  std::size_t size() const { return names.size(); }
  bool operator==(const LinkIndex&) const = default;
};

struct Candidate {
  std::size_t row = 0;
  std::string name;
  std::string cui;
  double similarity = 0.0;

  bool operator==(const Candidate&) const = default;
};

/// Similarity non-increasing; equal similarities ordered by row.
struct Prediction {
  std::vector<Candidate> ranked;
};

struct MentionResult {
  std::string mention;
  std::vector<std::string> gold;
  std::size_t first_hit = 0;  // 1-based rank of the first gold hit, 0 if none in range
  std::vector<Candidate> top;
};

struct EvalReport {
  std::vector<std::size_t> ks;  // ascending, always contains 1 and 5
  std::vector<double> accuracy;  // parallel to ks
  double acc_at_1 = 0.0;
  double acc_at_5 = 0.0;
  std::vector<MentionResult> mentions;

  double acc_at(std::size_t k) const;
};

/// Throws ZeroVector, or ConfigError for an empty ontology or batch_size 0.
/// Result is independent of batch_size.
LinkIndex build_index(const EncoderModel& model, const Ontology& ontology, std::size_t batch_size);

/// Exact scan over all rows, OpenMP-parallel scoring with a canonical
/// (similarity desc, row asc) selection. Requires 1 <= k <= index.size().
Prediction topk_unit(const LinkIndex& index, std::span<const double> unit_query, std::size_t k);
Prediction topk(const LinkIndex& index, const std::string& query, const EncoderModel& model, std::size_t k);

/// A mention hits at k when any of its top-k names carries a gold concept.
/// k larger than the index is clamped to the index size. Throws EmptyMentionSet.
EvalReport evaluate(const LinkIndex& index, const MentionSet& mentions, const EncoderModel& model,
                    std::span<const std::size_t> ks);

void write_eval_json(const EvalReport& report, const std::filesystem::path& path);

/// `name<TAB>cui<TAB>v1,...,vd` with 17 significant digits.
void export_embeddings(const LinkIndex& index, const std::filesystem::path& path);
LinkIndex read_embeddings(const std::filesystem::path& path);

}  // namespace selfalign

#endif  // SELFALIGN_LINKER_HPP_
