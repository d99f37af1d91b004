#ifndef SELFALIGN_METRIC_HPP_
#define SELFALIGN_METRIC_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "selfalign/matrix.hpp"

namespace selfalign {

inline constexpr double kZeroNormThreshold = 1e-12;

/// Per-batch geometry: unit rows U, S = U U^T, and the labels.
struct SimilarityBundle {
  Matrix unit_embeddings;
  std::vector<double> norms;  // L2 norm of each raw row, kept for backprop
  Matrix similarity;
  std::vector<std::string> labels;
  std::vector<std::uint32_t> label_ids;  // dense ids, first-appearance order

  std::size_t size() const { return labels.size(); }
};

/// Per-anchor index sets, each sorted ascending.
struct MinedPairs {
  std::vector<std::vector<std::uint32_t>> positives;
  std::vector<std::vector<std::uint32_t>> negatives;
  double lambda = 0.0;

  std::size_t positive_count() const;
  std::size_t negative_count() const;
  bool operator==(const MinedPairs& o) const {
    return positives == o.positives && negatives == o.negatives;
  }
};

std::vector<std::uint32_t> dense_label_ids(std::span<const std::string> labels);

/// Scales every row to unit L2 norm. Throws ZeroVector for a row whose norm
/// is below kZeroNormThreshold.
Matrix normalize_rows(const Matrix& x, std::vector<double>* norms = nullptr);

/// Throws ShapeMismatch when B < 2 or labels do not match the rows.
SimilarityBundle similarity_matrix(const Matrix& embeddings, std::span<const std::string> labels);

/// Chordal distance on the unit sphere, sqrt(2 - 2 S), clamped at zero.
Matrix distances_from_similarity(const Matrix& similarity);
Matrix euclidean_distances(const Matrix& x);

/// Keeps every triplet (a, p, n) with D_ap + lambda > D_an; p joins P_a and n
/// joins N_a. Runs in O(B^2) per batch using the per-anchor extremes.
MinedPairs mine_hard_pairs(const Matrix& distances, std::span<const std::uint32_t> label_ids,
                           double lambda);
MinedPairs mine_hard_pairs(const SimilarityBundle& bundle, double lambda);

/// Mining switched off: every same-label j != i is a positive, every
/// different-label j a negative.
MinedPairs all_pairs(std::span<const std::string> labels);

/// Pulls d(loss)/dS back through S = U U^T and row normalization onto the raw
/// embeddings. `grad_similarity` holds partials w.r.t. each entry S_ij.
Matrix backprop_similarity(const SimilarityBundle& bundle, const Matrix& grad_similarity);

}  // namespace selfalign

#endif  // SELFALIGN_METRIC_HPP_
