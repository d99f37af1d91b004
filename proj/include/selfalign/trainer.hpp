#ifndef SELFALIGN_TRAINER_HPP_
#define SELFALIGN_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "selfalign/encoder.hpp"
#include "selfalign/losses.hpp"
#include "selfalign/ontology.hpp"
#include "selfalign/optimizer.hpp"
#include "selfalign/pairgen.hpp"

namespace selfalign {

struct TrainConfig {
  double learning_rate = 2e-5;
  double weight_decay = 1e-2;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t epochs = 1;
  std::size_t batch_pairs = 256;
  LossParams loss = default_loss_params(LossKind::kMultiSimilarity);
  bool mining_enabled = true;
  double lambda = 0.2;
  // Mine on raw encoder outputs instead of unit-normalized ones (ablation).
  bool mine_on_raw = false;
  std::size_t pair_cap = kDefaultPairCap;
  std::uint64_t seed = 0;

  void validate() const;
  AdamWParams adamw() const {
    return {learning_rate, weight_decay, adam_beta1, adam_beta2, adam_eps};
  }
};

struct TrainRecord {
  std::size_t iteration = 0;  // 1-based, global across epochs
  double loss = 0.0;
  std::size_t pos_pairs = 0;
  std::size_t neg_pairs = 0;

  bool operator==(const TrainRecord&) const = default;
};

struct TrainLog {
  std::vector<TrainRecord> records;

  bool operator==(const TrainLog&) const = default;
};

struct TrainResult {
  EncoderModel model;
  TrainLog log;
  OptimizerState optimizer;
};

/// Shuffling seed for a given epoch of a run.
std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch);

struct StepStats {
  double loss = 0.0;
  std::size_t pos_pairs = 0;
  std::size_t neg_pairs = 0;
};

/// Forward, mine (or take all pairs), loss, backward. Leaves the model alone.
StepStats batch_gradients(const EncoderModel& model, const MiniBatch& batch, const TrainConfig& config,
                          ParamGrads* grads);

/// Runs `config.epochs` passes of pair batches with AdamW updates. Throws
/// EmptyPairList, and ZeroVector / NonFiniteGradient tagged with the iteration.
TrainResult pretrain(const PairList& pairs, EncoderModel model, const TrainConfig& config,
                     std::optional<OptimizerState> resume = std::nullopt);
/// Generates the pair list from `ontology` (cap and seed from config) first.
TrainResult pretrain(const Ontology& ontology, EncoderModel model, const TrainConfig& config);

/// Mention x gold-synonym pairs, then the same loop with a fresh optimizer.
TrainResult finetune(const MentionSet& mentions, const Ontology& ontology, EncoderModel model,
                     const TrainConfig& config);

/// Mean loss over one shuffled pass (no updates). `mining` overrides the
/// config switch so runs trained with and without mining can be scored on the
/// same objective.
double mean_objective(const EncoderModel& model, const PairList& pairs, const TrainConfig& config,
                      std::uint64_t shuffle_seed, bool mining);

/// CSV `iteration,loss,pos_pairs,neg_pairs` with a header row.
void write_train_log(const TrainLog& log, const std::filesystem::path& path);

}  // namespace selfalign

#endif  // SELFALIGN_TRAINER_HPP_
