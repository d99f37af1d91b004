#include "selfalign/linker.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "json.hpp"
#include "selfalign/errors.hpp"
#include "selfalign/metric.hpp"

namespace selfalign {

double EvalReport::acc_at(std::size_t k) const {
  for (std::size_t i = 0; i < ks.size(); ++i)
    if (ks[i] == k) return accuracy[i];
  throw ConfigError("k=" + std::to_string(k) + " was not evaluated");
}

LinkIndex build_index(const EncoderModel& model, const Ontology& ontology, std::size_t batch_size) {
  if (ontology.empty()) throw ConfigError("cannot index an empty dictionary");
  if (batch_size == 0) throw ConfigError("index batch size must be >= 1");
  const std::size_t n = ontology.size();
  const std::size_t d = model.config.embed_dim;

  LinkIndex index;
  index.unit_embeddings = Matrix(n, d);
  index.names.reserve(n);
  index.cuis.reserve(n);
  for (const auto& r : ontology.records()) {
    index.names.push_back(r.name);
    index.cuis.push_back(r.cui);
  }
  for (std::size_t begin = 0; begin < n; begin += batch_size) {
    const std::size_t end = std::min(n, begin + batch_size);
    const std::span<const std::string> names(index.names.data() + begin, end - begin);
    Matrix unit;
    try {
      unit = normalize_rows(encode_batch(model, names));
    } catch (const ZeroVector& e) {
      throw ZeroVector("dictionary batch starting at row " + std::to_string(begin) + ": " + e.detail());
    }
    std::copy(unit.values().begin(), unit.values().end(), index.unit_embeddings.row(begin).begin());
  }
  return index;
}

Prediction topk_unit(const LinkIndex& index, std::span<const double> unit_query, std::size_t k) {
  const std::size_t n = index.size();
  if (k < 1 || k > n)
    throw ConfigError("k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  if (unit_query.size() != index.unit_embeddings.cols()) throw ShapeMismatch("query dimension");

  std::vector<double> scores(n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) scores[i] = dot(index.unit_embeddings.row(i), unit_query);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
                    });
  Prediction p;
  p.ranked.reserve(k);
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t i = order[r];
    p.ranked.push_back({i, index.names[i], index.cuis[i], scores[i]});
  }
  return p;
}

Prediction topk(const LinkIndex& index, const std::string& query, const EncoderModel& model, std::size_t k) {
  const std::string names[1] = {query};
  Matrix unit;
  try {
    unit = normalize_rows(encode_batch(model, names));
  } catch (const ZeroVector& e) {
    throw ZeroVector("query '" + query + "': " + e.detail());
  }
  return topk_unit(index, unit.row(0), k);
}

EvalReport evaluate(const LinkIndex& index, const MentionSet& mentions, const EncoderModel& model,
                    std::span<const std::size_t> ks) {
  if (mentions.empty()) throw EmptyMentionSet();
  if (ks.empty()) throw ConfigError("no k values to evaluate");

  EvalReport report;
  report.ks.assign(ks.begin(), ks.end());
  report.ks.push_back(1);
  report.ks.push_back(5);
  std::sort(report.ks.begin(), report.ks.end());
  report.ks.erase(std::unique(report.ks.begin(), report.ks.end()), report.ks.end());
  if (report.ks.front() == 0) throw ConfigError("k must be >= 1");
  const std::size_t depth = std::min(report.ks.back(), index.size());

  std::vector<std::string> texts;
  texts.reserve(mentions.size());
  for (const auto& m : mentions.mentions) texts.push_back(m.text);
  Matrix unit;
  try {
    unit = normalize_rows(encode_batch(model, texts));
  } catch (const ZeroVector& e) {
    throw ZeroVector("mention encoding: " + e.detail());
  }

  report.mentions.resize(mentions.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t i = 0; i < mentions.size(); ++i) {
    const auto& m = mentions.mentions[i];
    auto& res = report.mentions[i];
    res.mention = m.text;
    res.gold = m.gold;
    res.top = topk_unit(index, unit.row(i), depth).ranked;
    const std::unordered_set<std::string> gold(m.gold.begin(), m.gold.end());
    for (std::size_t r = 0; r < res.top.size(); ++r) {
      if (gold.count(res.top[r].cui)) {
        res.first_hit = r + 1;
        break;
      }
    }
  }

  for (std::size_t k : report.ks) {
    std::size_t hits = 0;
    for (const auto& res : report.mentions)
      if (res.first_hit != 0 && res.first_hit <= k) ++hits;
    report.accuracy.push_back(static_cast<double>(hits) / static_cast<double>(mentions.size()));
  }
  report.acc_at_1 = report.acc_at(1);
  report.acc_at_5 = report.acc_at(5);
  return report;
}

void write_eval_json(const EvalReport& report, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["acc@1"] = report.acc_at_1;
  j["acc@5"] = report.acc_at_5;
  auto& acc = j["accuracy"] = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < report.ks.size(); ++i) acc[std::to_string(report.ks[i])] = report.accuracy[i];
  j["mentions"] = report.mentions.size();
  auto& rows = j["results"] = nlohmann::ordered_json::array();
  for (const auto& m : report.mentions) {
    nlohmann::ordered_json r;
    r["mention"] = m.mention;
    r["gold"] = m.gold;
    r["first_hit"] = m.first_hit;
    auto& top = r["top"] = nlohmann::ordered_json::array();
    for (const auto& c : m.top) top.push_back({{"cui", c.cui}, {"name", c.name}, {"similarity", c.similarity}});
    rows.push_back(std::move(r));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError(path.string(), "write failed");
}

void export_embeddings(const LinkIndex& index, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  char buf[32];
  for (std::size_t i = 0; i < index.size(); ++i) {
    out << index.names[i] << '\t' << index.cuis[i] << '\t';
    const auto row = index.unit_embeddings.row(i);
    for (std::size_t k = 0; k < row.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", row[k]);
      out << (k ? "," : "") << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError(path.string(), "write failed");
}

LinkIndex read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  LinkIndex index;
  std::vector<double> values;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = detail::split(line, '\t');
    if (fields.size() != 3) throw MalformedLine(path.string(), line_no, "expected 3 tab-separated columns");
    const auto parts = detail::split(fields[2], ',');
    if (dim == 0) dim = parts.size();
    if (parts.size() != dim) throw MalformedLine(path.string(), line_no, "inconsistent vector length");
    for (auto part : parts) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
      if (ec != std::errc() || ptr != part.data() + part.size())
        throw MalformedLine(path.string(), line_no, "bad number '" + std::string(part) + "'");
      values.push_back(v);
    }
    index.names.emplace_back(fields[0]);
    index.cuis.emplace_back(fields[1]);
  }
  index.unit_embeddings = Matrix(index.names.size(), dim);
  index.unit_embeddings.values() = std::move(values);
  return index;
}

}  // namespace selfalign
