#ifndef SELFALIGN_CONFIG_HPP_
#define SELFALIGN_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "selfalign/encoder.hpp"
#include "selfalign/losses.hpp"
#include "selfalign/synth.hpp"
#include "selfalign/trainer.hpp"

namespace selfalign {

// Everything a command needs, settable from a flat `key = value` file and
// overridable key by key from the command line. `seed` drives encoder
// initialization, pair sampling, batch shuffling and the synthetic generator.
struct RunConfig {
  std::uint64_t seed = 0;
  EncoderConfig encoder;
  TrainConfig train;

  // Loss fields left unset fall back to the chosen kind's registry defaults.
  LossKind loss_kind = LossKind::kMultiSimilarity;
  std::optional<double> loss_alpha, loss_beta, loss_epsilon, loss_margin, loss_scale, loss_tau, loss_m,
      loss_gamma;

  std::string dictionary;
  std::string pairs;
  std::string train_mentions;
  std::string test_mentions;
  std::string checkpoint;
  std::string query;
  std::string out = ".";

  std::vector<std::size_t> ks{1, 5};
  std::size_t k = 5;
  std::size_t index_batch = 1024;
  bool untrained = false;

  SyntheticSpec synth;

  /// Sets one key from its textual value. Throws ConfigError for an unknown
  /// key or an unparsable value, UnknownLossKind for a bad `loss`.
  void set(const std::string& key, const std::string& value);

  /// Registry defaults for loss_kind with the explicit overrides applied.
  LossParams resolved_loss() const;
  /// TrainConfig / EncoderConfig / SyntheticSpec with seed and loss filled in.
  TrainConfig resolved_train() const;
  EncoderConfig resolved_encoder() const;
  SyntheticSpec resolved_synth() const;

  /// Every key with its resolved value, one `key = value` per line, sorted.
  std::string serialize() const;

  static std::vector<std::string> keys();
};

/// Applies a config file on top of `config`. Blank lines and lines starting
/// with '#' are ignored. Throws IoError, ConfigError (with line number).
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

void write_resolved_config(const RunConfig& config, const std::filesystem::path& path);

}  // namespace selfalign

#endif  // SELFALIGN_CONFIG_HPP_
