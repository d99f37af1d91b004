#include "selfalign/ontology.hpp"

#include <fstream>
#include <set>
#include <unordered_set>
#include <utility>

#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "selfalign/errors.hpp"

namespace selfalign {

std::string normalize_name(std::string_view raw) {
  icu::UnicodeString folded =
      icu::UnicodeString::fromUTF8(icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  folded.foldCase(U_FOLD_CASE_DEFAULT);

  icu::UnicodeString out;
  bool pending_space = false;
  for (int32_t i = 0; i < folded.length();) {
    const UChar32 c = folded.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.isEmpty()) out.append(static_cast<UChar>(0x20));
    pending_space = false;
    out.append(c);
  }
  std::string result;
  out.toUTF8String(result);
  return result;
}

Ontology::Ontology(std::span<const SynonymRecord> records) {
  std::set<std::pair<std::string_view, std::string_view>> seen;
  records_.reserve(records.size());
  for (const auto& r : records) {
    if (r.name.empty() || r.cui.empty()) continue;
    if (!seen.emplace(r.cui, r.name).second) continue;
    records_.push_back(r);
  }
  for (std::size_t i = 0; i < records_.size(); ++i) {
    auto [it, inserted] = by_cui_.try_emplace(records_[i].cui);
    if (inserted) concepts_.push_back(records_[i].cui);
    it->second.push_back(i);
  }
}

std::span<const std::size_t> Ontology::names_of(const std::string& cui) const {
  auto it = by_cui_.find(cui);
  if (it == by_cui_.end()) return {};
  return it->second;
}

namespace detail {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace detail

namespace {

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  return in;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  return out;
}

// Strips a trailing CR so CRLF files parse the same as LF files.
std::string_view chomp(const std::string& line) {
  std::string_view v(line);
  if (!v.empty() && v.back() == '\r') v.remove_suffix(1);
  return v;
}

}  // namespace

Ontology load_dictionary(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  std::vector<SynonymRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view v = chomp(line);
    if (v.empty()) continue;
    const auto fields = detail::split(v, '\t');
    if (fields.size() != 2) {
      throw MalformedLine(path.string(), line_no,
                          "expected 2 tab-separated columns, found " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw MalformedLine(path.string(), line_no, "empty concept id");
    records.push_back({std::string(fields[0]), normalize_name(fields[1])});
  }
  Ontology ontology(records);
  if (ontology.empty()) throw EmptyFile(path.string());
  return ontology;
}

void write_dictionary(const Ontology& ontology, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  for (const auto& r : ontology.records()) out << r.cui << '\t' << r.name << '\n';
  if (!out) throw IoError(path.string(), "write failed");
}

MentionSet load_mentions(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  MentionSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view v = chomp(line);
    if (v.empty()) continue;
    const auto fields = detail::split(v, '\t');
    if (fields.size() != 2) {
      throw MalformedLine(path.string(), line_no,
                          "expected 2 tab-separated columns, found " + std::to_string(fields.size()));
    }
    Mention m;
    m.text = normalize_name(fields[0]);
    std::unordered_set<std::string_view> seen;
    for (auto cui : detail::split(fields[1], '|')) {
      if (cui.empty() || !seen.insert(cui).second) continue;
      m.gold.emplace_back(cui);
    }
    if (m.gold.empty()) throw EmptyGoldSet(path.string(), line_no);
    set.mentions.push_back(std::move(m));
  }
  return set;
}

void write_mentions(const MentionSet& mentions, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  for (const auto& m : mentions.mentions) {
    out << m.text << '\t';
    for (std::size_t i = 0; i < m.gold.size(); ++i) out << (i ? "|" : "") << m.gold[i];
    out << '\n';
  }
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace selfalign
