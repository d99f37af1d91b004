#include "selfalign/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "selfalign/errors.hpp"

namespace selfalign {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty())
    throw ConfigError("bad value '" + value + "' for key '" + key + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("bad boolean '" + value + "' for key '" + key + "' (use true/false)");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
std::string fmt_int(T v) {
  return std::to_string(v);
}

struct Entry {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define SA_DOUBLE(field) \
  Entry { [](RunConfig& c, const std::string& k, const std::string& v) { c.field = parse_number<double>(k, v); }, \
          [](const RunConfig& c) { return fmt(c.field); } }
#define SA_UINT(field, T) \
  Entry { [](RunConfig& c, const std::string& k, const std::string& v) { c.field = parse_number<T>(k, v); }, \
          [](const RunConfig& c) { return fmt_int(c.field); } }
#define SA_STRING(field) \
  Entry { [](RunConfig& c, const std::string&, const std::string& v) { c.field = v; }, \
          [](const RunConfig& c) { return c.field; } }
#define SA_BOOL(field) \
  Entry { [](RunConfig& c, const std::string& k, const std::string& v) { c.field = parse_bool(k, v); }, \
          [](const RunConfig& c) { return std::string(c.field ? "true" : "false"); } }
#define SA_LOSS(field, resolved) \
  Entry { [](RunConfig& c, const std::string& k, const std::string& v) { c.field = parse_number<double>(k, v); }, \
          [](const RunConfig& c) { return fmt(c.resolved_loss().resolved); } }

const std::map<std::string, Entry>& table() {
  static const std::map<std::string, Entry> t = {
      {"seed", SA_UINT(seed, std::uint64_t)},
      // encoder
      {"ngram_n", SA_UINT(encoder.ngram_n, std::uint32_t)},
      {"vocab_buckets", SA_UINT(encoder.vocab_buckets, std::uint64_t)},
      {"embed_dim", SA_UINT(encoder.embed_dim, std::uint32_t)},
      {"max_tokens", SA_UINT(encoder.max_tokens, std::uint32_t)},
      {"init_scale", SA_DOUBLE(encoder.init_scale)},
      // trainer
      {"learning_rate", SA_DOUBLE(train.learning_rate)},
      {"weight_decay", SA_DOUBLE(train.weight_decay)},
      {"adam_beta1", SA_DOUBLE(train.adam_beta1)},
      {"adam_beta2", SA_DOUBLE(train.adam_beta2)},
      {"adam_eps", SA_DOUBLE(train.adam_eps)},
      {"epochs", SA_UINT(train.epochs, std::size_t)},
      {"batch_pairs", SA_UINT(train.batch_pairs, std::size_t)},
      {"mining", SA_BOOL(train.mining_enabled)},
      {"lambda", SA_DOUBLE(train.lambda)},
      {"mine_on_raw", SA_BOOL(train.mine_on_raw)},
      {"pair_cap", SA_UINT(train.pair_cap, std::size_t)},
      // loss
      {"loss",
       Entry{[](RunConfig& c, const std::string&, const std::string& v) { c.loss_kind = parse_loss_kind(v); },
             [](const RunConfig& c) { return std::string(to_string(c.loss_kind)); }}},
      {"loss_alpha", SA_LOSS(loss_alpha, alpha)},
      {"loss_beta", SA_LOSS(loss_beta, beta)},
      {"loss_epsilon", SA_LOSS(loss_epsilon, epsilon)},
      {"loss_margin", SA_LOSS(loss_margin, margin)},
      {"loss_scale", SA_LOSS(loss_scale, scale)},
      {"loss_tau", SA_LOSS(loss_tau, tau)},
      {"loss_m", SA_LOSS(loss_m, m)},
      {"loss_gamma", SA_LOSS(loss_gamma, gamma)},
      // paths and linking
      {"dictionary", SA_STRING(dictionary)},
      {"pairs", SA_STRING(pairs)},
      {"train_mentions", SA_STRING(train_mentions)},
      {"test_mentions", SA_STRING(test_mentions)},
      {"checkpoint", SA_STRING(checkpoint)},
      {"query", SA_STRING(query)},
      {"out", SA_STRING(out)},
      {"ks",
       Entry{[](RunConfig& c, const std::string& k, const std::string& v) {
               std::vector<std::size_t> ks;
               for (auto part : detail::split(v, ',')) ks.push_back(parse_number<std::size_t>(k, trim(std::string(part))));
               c.ks = std::move(ks);
             },
             [](const RunConfig& c) {
               std::string s;
               for (std::size_t i = 0; i < c.ks.size(); ++i) s += (i ? "," : "") + std::to_string(c.ks[i]);
               return s;
             }}},
      {"k", SA_UINT(k, std::size_t)},
      {"index_batch", SA_UINT(index_batch, std::size_t)},
      {"untrained", SA_BOOL(untrained)},
      // synthetic generator
      {"synth_concepts", SA_UINT(synth.n_concepts, std::size_t)},
      {"synth_synonyms", SA_UINT(synth.synonyms_per_concept, std::size_t)},
      {"synth_edit_ops", SA_UINT(synth.edit_ops, std::size_t)},
      {"synth_holdout", SA_UINT(synth.holdout_per_concept, std::size_t)},
  };
  return t;
}

#undef SA_DOUBLE
#undef SA_UINT
#undef SA_STRING
#undef SA_BOOL
#undef SA_LOSS

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto it = table().find(key);
  if (it == table().end()) throw ConfigError("unknown key '" + key + "'");
  it->second.set(*this, key, value);
}

LossParams RunConfig::resolved_loss() const {
  LossParams p = default_loss_params(loss_kind);
  if (loss_alpha) p.alpha = *loss_alpha;
  if (loss_beta) p.beta = *loss_beta;
  if (loss_epsilon) p.epsilon = *loss_epsilon;
  if (loss_margin) p.margin = *loss_margin;
  if (loss_scale) p.scale = *loss_scale;
  if (loss_tau) p.tau = *loss_tau;
  if (loss_m) p.m = *loss_m;
  if (loss_gamma) p.gamma = *loss_gamma;
  return p;
}

TrainConfig RunConfig::resolved_train() const {
  TrainConfig t = train;
  t.seed = seed;
  t.loss = resolved_loss();
  return t;
}

EncoderConfig RunConfig::resolved_encoder() const {
  EncoderConfig e = encoder;
  e.seed = seed;
  return e;
}

SyntheticSpec RunConfig::resolved_synth() const {
  SyntheticSpec s = synth;
  s.seed = seed;
  return s;
}

std::string RunConfig::serialize() const {
  std::string out;
  for (const auto& [key, entry] : table()) out += key + " = " + entry.get(*this) + "\n";
  return out;
}

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> k;
  for (const auto& [key, entry] : table()) k.push_back(key);
  return k;
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open config");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    try {
      config.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void write_resolved_config(const RunConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << config.serialize();
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace selfalign
