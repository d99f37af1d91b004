#include "selfalign/encoder.hpp"

#include <algorithm>
#include <random>

#include "selfalign/errors.hpp"

namespace selfalign {

void EncoderConfig::validate() const {
  if (ngram_n < 1) throw ConfigError("ngram_n must be >= 1");
  if (vocab_buckets < 1) throw ConfigError("vocab_buckets must be >= 1");
  if (embed_dim < 1) throw ConfigError("embed_dim must be >= 1");
  if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
  if (!(init_scale >= 0.0)) throw ConfigError("init_scale must be >= 0");
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

TokenIds tokenize(std::string_view name, const EncoderConfig& config) {
  std::string padded;
  padded.reserve(name.size() + 2);
  padded.push_back('^');
  padded.append(name);
  padded.push_back('$');

  // Byte offset of every code point start, plus the end.
  std::vector<std::size_t> starts;
  starts.reserve(padded.size() + 1);
  for (std::size_t i = 0; i < padded.size(); ++i)
    if ((static_cast<unsigned char>(padded[i]) & 0xC0) != 0x80) starts.push_back(i);
  const std::size_t chars = starts.size();
  starts.push_back(padded.size());

  const std::string_view view(padded);
  TokenIds ids;
  if (chars <= config.ngram_n) {
    ids.push_back(fnv1a64(view) % config.vocab_buckets);
    return ids;
  }
  const std::size_t grams = std::min<std::size_t>(chars - config.ngram_n + 1, config.max_tokens);
  ids.reserve(grams);
  for (std::size_t i = 0; i < grams; ++i) {
    const auto gram = view.substr(starts[i], starts[i + config.ngram_n] - starts[i]);
    ids.push_back(fnv1a64(gram) % config.vocab_buckets);
  }
  return ids;
}

EncoderModel init_model(const EncoderConfig& config) {
  config.validate();
  const std::size_t d = config.embed_dim;
  EncoderModel model{config, Matrix(config.vocab_buckets, d), Matrix(d, d),
                     std::vector<double>(d, 0.0)};
  if (config.init_scale > 0.0) {
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> dist(-config.init_scale, config.init_scale);
    for (double& v : model.embedding_table.values()) v = dist(rng);
    for (double& v : model.proj_weight.values()) v = dist(rng);
  }
  return model;
}

Matrix encode_batch(const EncoderModel& model, std::span<const std::string> names,
                    ForwardCache* cache) {
  const std::size_t batch = names.size();
  const std::size_t d = model.config.embed_dim;
  std::vector<TokenIds> ids(batch);
  Matrix pooled(batch, d);
  Matrix out(batch, d);

#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < batch; ++i) {
    ids[i] = tokenize(names[i], model.config);
    auto p = pooled.row(i);
    for (std::uint64_t id : ids[i]) {
      const auto e = model.embedding_table.row(id);
      for (std::size_t k = 0; k < d; ++k) p[k] += e[k];
    }
    const double count = static_cast<double>(ids[i].size());
    for (std::size_t k = 0; k < d; ++k) p[k] /= count;

    auto o = out.row(i);
    for (std::size_t k = 0; k < d; ++k) o[k] = dot(model.proj_weight.row(k), p) + model.proj_bias[k];
  }

  if (cache != nullptr) {
    cache->token_ids = std::move(ids);
    cache->pooled = std::move(pooled);
    cache->outputs = out;
  }
  return out;
}

ParamGrads backward_batch(const EncoderModel& model, const ForwardCache& cache,
                          const Matrix& grad_outputs) {
  const std::size_t batch = cache.token_ids.size();
  const std::size_t d = model.config.embed_dim;
  if (grad_outputs.rows() != batch || grad_outputs.cols() != d || cache.pooled.rows() != batch ||
      cache.pooled.cols() != d) {
    throw ShapeMismatch("gradient is " + std::to_string(grad_outputs.rows()) + "x" +
                        std::to_string(grad_outputs.cols()) + ", cache expects " +
                        std::to_string(batch) + "x" + std::to_string(d));
  }

  ParamGrads grads;
  grads.proj_weight = Matrix(d, d);
  grads.proj_bias.assign(d, 0.0);

  // dW[k][l] = sum_i g[i][k] * pooled[i][l]; each k owned by one thread.
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < d; ++k) {
    auto w = grads.proj_weight.row(k);
    double b = 0.0;
    for (std::size_t i = 0; i < batch; ++i) {
      const double g = grad_outputs(i, k);
      const auto p = cache.pooled.row(i);
      for (std::size_t l = 0; l < d; ++l) w[l] += g * p[l];
      b += g;
    }
    grads.proj_bias[k] = b;
  }

  // d(pooled_i) = W^T g_i, then spread evenly over the name's tokens.
  Matrix grad_pooled(batch, d);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < batch; ++i) {
    auto gp = grad_pooled.row(i);
    const auto g = grad_outputs.row(i);
    for (std::size_t k = 0; k < d; ++k) {
      const auto w = model.proj_weight.row(k);
      for (std::size_t l = 0; l < d; ++l) gp[l] += g[k] * w[l];
    }
    const double inv = 1.0 / static_cast<double>(cache.token_ids[i].size());
    for (std::size_t l = 0; l < d; ++l) gp[l] *= inv;
  }

  for (const auto& ids : cache.token_ids)
    grads.embedding_rows.insert(grads.embedding_rows.end(), ids.begin(), ids.end());
  std::sort(grads.embedding_rows.begin(), grads.embedding_rows.end());
  grads.embedding_rows.erase(std::unique(grads.embedding_rows.begin(), grads.embedding_rows.end()),
                             grads.embedding_rows.end());
  grads.embedding_grads = Matrix(grads.embedding_rows.size(), d);

  // Serial scatter in (name, token) order so the sums are reproducible.
  for (std::size_t i = 0; i < batch; ++i) {
    const auto gp = grad_pooled.row(i);
    for (std::uint64_t id : cache.token_ids[i]) {
      const auto slot = static_cast<std::size_t>(
          std::lower_bound(grads.embedding_rows.begin(), grads.embedding_rows.end(), id) -
          grads.embedding_rows.begin());
      auto r = grads.embedding_grads.row(slot);
      for (std::size_t l = 0; l < d; ++l) r[l] += gp[l];
    }
  }
  return grads;
}

}  // namespace selfalign
