#include "selfalign/synth.hpp"

#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "selfalign/errors.hpp"

namespace selfalign {

void SyntheticSpec::validate() const {
  if (n_concepts < 1) throw ConfigError("synth: n_concepts must be >= 1");
  if (holdout_per_concept < 1) throw ConfigError("synth: holdout_per_concept must be >= 1");
  if (synonyms_per_concept <= holdout_per_concept)
    throw ConfigError("synth: synonyms_per_concept must exceed holdout_per_concept");
}

namespace {

constexpr int kMaxAttempts = 1000;

class NameGenerator {
 public:
  explicit NameGenerator(std::uint64_t seed) : rng_(seed) {}

  std::size_t uniform(std::size_t lo, std::size_t hi) {  // inclusive
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  char letter() { return static_cast<char>('a' + uniform(0, 25)); }

  std::string canonical() {
    std::string name;
    const std::size_t words = uniform(1, 3);
    for (std::size_t w = 0; w < words; ++w) {
      if (w) name.push_back(' ');
      const std::size_t len = uniform(4, 9);
      for (std::size_t i = 0; i < len; ++i) name.push_back(letter());
    }
    return name;
  }

  // Applies `ops` random edits: substitution, insertion, deletion, or
  // truncating one word to an abbreviation-style prefix.
  std::string perturb(const std::string& base, std::size_t ops) {
    std::vector<std::string> words;
    std::size_t start = 0;
    while (start <= base.size()) {
      const std::size_t sp = base.find(' ', start);
      const std::size_t end = sp == std::string::npos ? base.size() : sp;
      words.push_back(base.substr(start, end - start));
      start = end + 1;
    }
    for (std::size_t op = 0; op < ops; ++op) {
      std::string& w = words[uniform(0, words.size() - 1)];
      switch (uniform(0, 3)) {
        case 0:
          w[uniform(0, w.size() - 1)] = letter();
          break;
        case 1:
          w.insert(w.begin() + static_cast<std::ptrdiff_t>(uniform(0, w.size())), letter());
          break;
        case 2:
          if (w.size() > 2) w.erase(w.begin() + static_cast<std::ptrdiff_t>(uniform(0, w.size() - 1)));
          break;
        default:
          if (w.size() > 4) w.resize(uniform(3, w.size() - 1));
          break;
      }
    }
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) out += (i ? " " : "") + words[i];
    return out;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  NameGenerator gen(spec.seed);
  std::unordered_set<std::string> used;

  auto fresh = [&](auto&& make) {
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      std::string s = make();
      if (used.insert(s).second) return s;
    }
    throw ConfigError("synth: could not generate a distinct name; raise edit_ops or lower n_concepts");
  };

  std::vector<SynonymRecord> records;
  SyntheticData data;
  const std::size_t kept = spec.synonyms_per_concept - spec.holdout_per_concept;
  for (std::size_t c = 0; c < spec.n_concepts; ++c) {
    char cui[16];
    std::snprintf(cui, sizeof(cui), "C%07zu", c + 1);
    const std::string base = fresh([&] { return gen.canonical(); });
    std::vector<std::string> synonyms{base};
    while (synonyms.size() < spec.synonyms_per_concept)
      synonyms.push_back(fresh([&] { return gen.perturb(base, spec.edit_ops); }));
    for (std::size_t s = 0; s < kept; ++s) records.push_back({cui, synonyms[s]});
    for (std::size_t s = kept; s < synonyms.size(); ++s) data.test.mentions.push_back({synonyms[s], {cui}});
    for (std::size_t h = 0; h < spec.holdout_per_concept; ++h)
      data.train.mentions.push_back({fresh([&] { return gen.perturb(base, spec.edit_ops); }), {cui}});
  }
  data.dictionary = Ontology(records);
  return data;
}

void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), ec.message());
  write_dictionary(data.dictionary, dir / "dictionary.tsv");
  write_mentions(data.train, dir / "train_mentions.tsv");
  write_mentions(data.test, dir / "test_mentions.tsv");
}

}  // namespace selfalign
