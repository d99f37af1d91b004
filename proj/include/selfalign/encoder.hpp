#ifndef SELFALIGN_ENCODER_HPP_
#define SELFALIGN_ENCODER_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "selfalign/matrix.hpp"

namespace selfalign {

struct EncoderConfig {
  std::uint32_t ngram_n = 3;
  std::uint64_t vocab_buckets = 100000;
  std::uint32_t embed_dim = 64;
  std::uint32_t max_tokens = 25;
  double init_scale = 0.05;
  std::uint64_t seed = 0;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
  bool operator==(const EncoderConfig&) const = default;
};

// Character n-gram hashing encoder: bucketed n-gram embeddings, mean pooled,
// then an affine projection  f(x) = W * mean(E[ids(x)]) + b.
struct EncoderModel {
  EncoderConfig config;
  Matrix embedding_table;         // vocab_buckets x embed_dim
  Matrix proj_weight;             // embed_dim x embed_dim
  std::vector<double> proj_bias;  // embed_dim

  bool operator==(const EncoderModel&) const = default;
};

using TokenIds = std::vector<std::uint64_t>;

struct ForwardCache {
  std::vector<TokenIds> token_ids;
  Matrix pooled;   // B x d
  Matrix outputs;  // B x d
};

// Embedding-table gradient is kept sparse: one row per touched bucket,
// `embedding_rows` sorted ascending.
struct ParamGrads {
  std::vector<std::uint64_t> embedding_rows;
  Matrix embedding_grads;
  Matrix proj_weight;
  std::vector<double> proj_bias;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

/// Pads with '^' and '$', takes every window of `ngram_n` characters (UTF-8
/// code points) in order, hashes each modulo `vocab_buckets`, keeps the first
/// `max_tokens`. A padded string no longer than n yields a single gram.
TokenIds tokenize(std::string_view name, const EncoderConfig& config);

EncoderModel init_model(const EncoderConfig& config);

/// Rows of the result are independent of each other; the loop over names is
/// OpenMP-parallel and bitwise reproducible for any thread count.
Matrix encode_batch(const EncoderModel& model, std::span<const std::string> names,
                    ForwardCache* cache = nullptr);

/// Chain rule from d(loss)/d(outputs) back to every parameter. Throws
/// ShapeMismatch when `grad_outputs` does not match the cache.
ParamGrads backward_batch(const EncoderModel& model, const ForwardCache& cache,
                          const Matrix& grad_outputs);

}  // namespace selfalign

#endif  // SELFALIGN_ENCODER_HPP_
