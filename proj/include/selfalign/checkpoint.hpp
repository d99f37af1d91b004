#ifndef SELFALIGN_CHECKPOINT_HPP_
#define SELFALIGN_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>

#include "selfalign/encoder.hpp"
#include "selfalign/optimizer.hpp"

namespace selfalign {

// Layout, all integers and floats little-endian:
//   "SAPE" u32 version
//   u32 ngram_n, u64 vocab_buckets, u32 embed_dim, u32 max_tokens, f64 init_scale, u64 seed
//   f64[V*d] embedding_table, f64[d*d] proj_weight, f64[d] proj_bias   (row-major)
// optionally followed by
//   "OPTS" u64 step, then m/v for embedding_table, proj_weight, proj_bias.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  EncoderModel model;
  std::optional<OptimizerState> optimizer;
};

void save_checkpoint(const std::filesystem::path& path, const EncoderModel& model,
                     const OptimizerState* optimizer = nullptr);

/// Throws IoError on a missing, truncated or foreign file.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace selfalign

#endif  // SELFALIGN_CHECKPOINT_HPP_
