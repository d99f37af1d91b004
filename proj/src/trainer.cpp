#include "selfalign/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "selfalign/errors.hpp"
#include "selfalign/metric.hpp"

namespace selfalign {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ConfigError("learning_rate must be > 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) throw ConfigError("adam_beta1 must lie in [0, 1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) throw ConfigError("adam_beta2 must lie in [0, 1)");
  if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be > 0");
  if (batch_pairs < 2) throw ConfigError("batch_pairs must be >= 2");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (pair_cap < 1) throw ConfigError("pair_cap must be >= 1");
  loss.validate();
}

std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) {
  return seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(epoch) + 1);
}

namespace {

MinedPairs select_pairs(const SimilarityBundle& bundle, const Matrix& raw, const TrainConfig& config,
                        bool mining) {
  if (!mining) return all_pairs(bundle.labels);
  if (config.mine_on_raw) return mine_hard_pairs(euclidean_distances(raw), bundle.label_ids, config.lambda);
  return mine_hard_pairs(bundle, config.lambda);
}

StepStats forward_loss(const EncoderModel& model, const MiniBatch& batch, const TrainConfig& config,
                       bool mining, ParamGrads* grads) {
  ForwardCache cache;
  const Matrix raw = encode_batch(model, batch.names, &cache);
  const SimilarityBundle bundle = similarity_matrix(raw, batch.labels);
  const MinedPairs pairs = select_pairs(bundle, raw, config, mining);
  StepStats stats{0.0, pairs.positive_count(), pairs.negative_count()};
  if (grads == nullptr) {
    stats.loss = loss_on_similarity(bundle.similarity, pairs, config.loss).value;
    return stats;
  }
  const LossOutput loss = compute_loss(bundle, pairs, config.loss);
  stats.loss = loss.value;
  *grads = backward_batch(model, cache, loss.grad_embeddings);
  return stats;
}

}  // namespace

StepStats batch_gradients(const EncoderModel& model, const MiniBatch& batch, const TrainConfig& config,
                          ParamGrads* grads) {
  return forward_loss(model, batch, config, config.mining_enabled, grads);
}

TrainResult pretrain(const PairList& pairs, EncoderModel model, const TrainConfig& config,
                     std::optional<OptimizerState> resume) {
  config.validate();
  if (pairs.empty()) throw EmptyPairList();

  TrainResult result{std::move(model), {}, {}};
  result.optimizer = resume ? std::move(*resume) : init_optimizer_state(result.model);
  const AdamWParams adamw = config.adamw();

  std::size_t iteration = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    BatchIterator batches(pairs, config.batch_pairs, epoch_seed(config.seed, epoch));
    while (auto batch = batches.next()) {
      ++iteration;
      ParamGrads grads;
      StepStats stats;
      try {
        stats = batch_gradients(result.model, *batch, config, &grads);
        if (!std::isfinite(stats.loss)) throw NonFiniteGradient(iteration);
        adamw_step(result.model, grads, result.optimizer, adamw);
      } catch (const ZeroVector& e) {
        throw ZeroVector(e.detail() + " (iteration " + std::to_string(iteration) + ")");
      } catch (const NonFiniteGradient&) {
        throw NonFiniteGradient(iteration);
      }
      result.log.records.push_back({iteration, stats.loss, stats.pos_pairs, stats.neg_pairs});
    }
  }
  return result;
}

TrainResult pretrain(const Ontology& ontology, EncoderModel model, const TrainConfig& config) {
  config.validate();
  return pretrain(generate_pairs(ontology, config.pair_cap, config.seed), std::move(model), config);
}

TrainResult finetune(const MentionSet& mentions, const Ontology& ontology, EncoderModel model,
                     const TrainConfig& config) {
  config.validate();
  const PairList pairs = generate_finetune_pairs(mentions, ontology, config.pair_cap, config.seed);
  if (config.epochs == 0) {
    OptimizerState state = init_optimizer_state(model);
    return {std::move(model), {}, std::move(state)};
  }
  return pretrain(pairs, std::move(model), config);
}

double mean_objective(const EncoderModel& model, const PairList& pairs, const TrainConfig& config,
                      std::uint64_t shuffle_seed, bool mining) {
  BatchIterator batches(pairs, config.batch_pairs, shuffle_seed);
  double total = 0.0;
  std::size_t n = 0;
  while (auto batch = batches.next()) {
    total += forward_loss(model, *batch, config, mining, nullptr).loss;
    ++n;
  }
  if (n == 0) throw EmptyPairList();
  return total / static_cast<double>(n);
}

void write_train_log(const TrainLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << "iteration,loss,pos_pairs,neg_pairs\n";
  char buf[64];
  for (const auto& r : log.records) {
    std::snprintf(buf, sizeof(buf), "%.17g", r.loss);
    out << r.iteration << ',' << buf << ',' << r.pos_pairs << ',' << r.neg_pairs << '\n';
  }
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace selfalign
