#ifndef SELFALIGN_ONTOLOGY_HPP_
#define SELFALIGN_ONTOLOGY_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace selfalign {

/// Unicode full case folding, then trims and collapses whitespace runs to a
/// single ASCII space. Accents are kept. Idempotent.
std::string normalize_name(std::string_view raw);

struct SynonymRecord {
  std::string cui;
  std::string name;

  bool operator==(const SynonymRecord&) const = default;
};

/// A synonym dictionary: deduplicated (cui, name) records in first-seen order
/// plus a concept index. Immutable once built.
class Ontology {
 public:
  Ontology() = default;

  /// Names must already be normalized. Exact duplicate (cui, name) pairs and
  /// empty names are dropped; order of first occurrence is kept.
  explicit Ontology(std::span<const SynonymRecord> records);

  const std::vector<SynonymRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  /// Concept ids in order of first appearance.
  const std::vector<std::string>& concepts() const { return concepts_; }
  bool contains(const std::string& cui) const { return by_cui_.count(cui) != 0; }
  /// Record indices for `cui`; empty span if unknown.
  std::span<const std::size_t> names_of(const std::string& cui) const;

  bool operator==(const Ontology& other) const { return records_ == other.records_; }

 private:
  std::vector<SynonymRecord> records_;
  std::vector<std::string> concepts_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_cui_;
};

struct Mention {
  std::string text;
  std::vector<std::string> gold;  // nonempty, duplicates removed, file order

  bool operator==(const Mention&) const = default;
};

struct MentionSet {
  std::vector<Mention> mentions;

  std::size_t size() const { return mentions.size(); }
  bool empty() const { return mentions.empty(); }
  bool operator==(const MentionSet&) const = default;
};

/// `cui<TAB>name` per line. Throws MalformedLine, EmptyFile, IoError.
Ontology load_dictionary(const std::filesystem::path& path);
void write_dictionary(const Ontology& ontology, const std::filesystem::path& path);

/// `mention<TAB>cui(|cui)*` per line. Throws MalformedLine, EmptyGoldSet, IoError.
MentionSet load_mentions(const std::filesystem::path& path);
void write_mentions(const MentionSet& mentions, const std::filesystem::path& path);

namespace detail {
// Splits on a single-character separator, keeping empty fields.
std::vector<std::string_view> split(std::string_view line, char sep);
}  // namespace detail

}  // namespace selfalign

#endif  // SELFALIGN_ONTOLOGY_HPP_
