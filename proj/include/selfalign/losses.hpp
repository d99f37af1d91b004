#ifndef SELFALIGN_LOSSES_HPP_
#define SELFALIGN_LOSSES_HPP_

#include <array>
#include <functional>
#include <string>
#include <string_view>

#include "selfalign/matrix.hpp"
#include "selfalign/metric.hpp"

namespace selfalign {

enum class LossKind { kMultiSimilarity, kCosine, kTriplet, kNca, kLiftedStructure, kInfoNce, kCircle };

inline constexpr std::array<LossKind, 7> kAllLossKinds = {
    LossKind::kMultiSimilarity, LossKind::kCosine,  LossKind::kTriplet, LossKind::kNca,
    LossKind::kLiftedStructure, LossKind::kInfoNce, LossKind::kCircle};

std::string_view to_string(LossKind kind);
/// Throws UnknownLossKind.
LossKind parse_loss_kind(std::string_view name);

/// Only the fields a kind reads matter:
///   multi_similarity: alpha, beta, epsilon      cosine: margin
///   triplet: margin        nca: scale            lifted_structure: alpha
///   infonce: tau           circle: m, gamma
struct LossParams {
  LossKind kind = LossKind::kMultiSimilarity;
  double alpha = 2.0;
  double beta = 50.0;
  double epsilon = 0.5;
  double margin = 0.2;
  double scale = 20.0;
  double tau = 0.07;
  double m = 0.25;
  double gamma = 256.0;

  /// Throws ConfigError for non-finite or out-of-range fields of this kind.
  void validate() const;
};

/// Tuned defaults for each objective.
LossParams default_loss_params(LossKind kind);

struct SimilarityLoss {
  double value = 0.0;
  Matrix grad_similarity;  // d(value)/dS_ij, B x B
};

struct LossOutput {
  double value = 0.0;
  Matrix grad_embeddings;  // d(value)/d(raw embeddings), B x d
};

/// Evaluates the loss directly on a similarity matrix. S need not come from
/// real embeddings, which lets callers probe boundary cases.
SimilarityLoss loss_on_similarity(const Matrix& similarity, const MinedPairs& pairs,
                                  const LossParams& params);

/// loss_on_similarity followed by backprop_similarity.
LossOutput compute_loss(const SimilarityBundle& bundle, const MinedPairs& pairs,
                        const LossParams& params);

LossOutput ms_loss(const SimilarityBundle& bundle, const MinedPairs& pairs, const LossParams& params);
LossOutput cosine_loss(const SimilarityBundle& bundle, const MinedPairs& pairs, const LossParams& params);
LossOutput triplet_loss(const SimilarityBundle& bundle, const MinedPairs& pairs, const LossParams& params);
LossOutput nca_loss(const SimilarityBundle& bundle, const MinedPairs& pairs, const LossParams& params);
LossOutput lifted_structure_loss(const SimilarityBundle& bundle, const MinedPairs& pairs,
                                 const LossParams& params);
LossOutput infonce_loss(const SimilarityBundle& bundle, const MinedPairs& pairs, const LossParams& params);
LossOutput circle_loss(const SimilarityBundle& bundle, const MinedPairs& pairs, const LossParams& params);

using LossFn = std::function<LossOutput(const SimilarityBundle&, const MinedPairs&, const LossParams&)>;

struct RegisteredLoss {
  LossFn fn;
  LossParams defaults;
};

/// Throws UnknownLossKind.
RegisteredLoss loss_registry(std::string_view kind);

}  // namespace selfalign

#endif  // SELFALIGN_LOSSES_HPP_
