#include "selfalign/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "selfalign/errors.hpp"

namespace selfalign {

std::size_t MinedPairs::positive_count() const {
  std::size_t n = 0;
  for (const auto& p : positives) n += p.size();
  return n;
}

std::size_t MinedPairs::negative_count() const {
  std::size_t n = 0;
  for (const auto& p : negatives) n += p.size();
  return n;
}

std::vector<std::uint32_t> dense_label_ids(std::span<const std::string> labels) {
  std::unordered_map<std::string, std::uint32_t> ids;
  std::vector<std::uint32_t> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    auto [it, inserted] = ids.try_emplace(l, static_cast<std::uint32_t>(ids.size()));
    out.push_back(it->second);
  }
  return out;
}

Matrix normalize_rows(const Matrix& x, std::vector<double>* norms) {
  Matrix u(x.rows(), x.cols());
  std::vector<double> n(x.rows());
  bool degenerate = false;
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto r = x.row(i);
    n[i] = std::sqrt(dot(r, r));
    if (!(n[i] >= kZeroNormThreshold)) {
#pragma omp atomic write
      degenerate = true;
      continue;
    }
    auto out = u.row(i);
    for (std::size_t k = 0; k < r.size(); ++k) out[k] = r[k] / n[i];
  }
  if (degenerate) {
    for (std::size_t i = 0; i < x.rows(); ++i)
      if (!(n[i] >= kZeroNormThreshold))
        throw ZeroVector("row " + std::to_string(i) + " has norm " + std::to_string(n[i]));
  }
  if (norms != nullptr) *norms = std::move(n);
  return u;
}

SimilarityBundle similarity_matrix(const Matrix& embeddings, std::span<const std::string> labels) {
  const std::size_t batch = embeddings.rows();
  if (batch < 2) throw ShapeMismatch("similarity needs at least 2 rows");
  if (labels.size() != batch)
    throw ShapeMismatch(std::to_string(labels.size()) + " labels for " + std::to_string(batch) + " rows");

  SimilarityBundle b;
  b.unit_embeddings = normalize_rows(embeddings, &b.norms);
  b.labels.assign(labels.begin(), labels.end());
  b.label_ids = dense_label_ids(labels);
  b.similarity = Matrix(batch, batch);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < batch; ++i) {
    const auto ui = b.unit_embeddings.row(i);
    for (std::size_t j = 0; j < batch; ++j) b.similarity(i, j) = dot(ui, b.unit_embeddings.row(j));
  }
  return b;
}

Matrix distances_from_similarity(const Matrix& similarity) {
  Matrix d(similarity.rows(), similarity.cols());
  auto& out = d.values();
  const auto& s = similarity.values();
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = std::sqrt(std::max(0.0, 2.0 - 2.0 * s[i]));
  return d;
}

Matrix euclidean_distances(const Matrix& x) {
  const std::size_t n = x.rows();
  Matrix d(n, n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = x.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const auto xj = x.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < xi.size(); ++k) {
        const double diff = xi[k] - xj[k];
        s += diff * diff;
      }
      d(i, j) = std::sqrt(s);
    }
  }
  return d;
}

MinedPairs mine_hard_pairs(const Matrix& distances, std::span<const std::uint32_t> label_ids,
                           double lambda) {
  if (!(lambda >= 0.0)) throw ConfigError("mining margin lambda must be >= 0");
  const std::size_t batch = label_ids.size();
  if (distances.rows() != batch || distances.cols() != batch)
    throw ShapeMismatch("distance matrix does not match label count");

  MinedPairs out;
  out.lambda = lambda;
  out.positives.resize(batch);
  out.negatives.resize(batch);

  // p is hard iff D_ap + lambda beats the closest negative; n is hard iff the
  // farthest positive plus lambda beats D_an. fl(x + lambda) is monotone in x,
  // so these match the per-triplet test exactly.
#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t a = 0; a < batch; ++a) {
    double closest_negative = std::numeric_limits<double>::infinity();
    double farthest_positive = -std::numeric_limits<double>::infinity();
    bool has_pos = false, has_neg = false;
    for (std::size_t j = 0; j < batch; ++j) {
      if (j == a) continue;
      const double dist = distances(a, j);
      if (label_ids[j] == label_ids[a]) {
        has_pos = true;
        farthest_positive = std::max(farthest_positive, dist);
      } else {
        has_neg = true;
        closest_negative = std::min(closest_negative, dist);
      }
    }
    if (!has_pos || !has_neg) continue;
    const double reach = farthest_positive + lambda;
    for (std::size_t j = 0; j < batch; ++j) {
      if (j == a) continue;
      const double dist = distances(a, j);
      if (label_ids[j] == label_ids[a]) {
        if (dist + lambda > closest_negative) out.positives[a].push_back(static_cast<std::uint32_t>(j));
      } else if (reach > dist) {
        out.negatives[a].push_back(static_cast<std::uint32_t>(j));
      }
    }
  }
  return out;
}

MinedPairs mine_hard_pairs(const SimilarityBundle& bundle, double lambda) {
  return mine_hard_pairs(distances_from_similarity(bundle.similarity), bundle.label_ids, lambda);
}

MinedPairs all_pairs(std::span<const std::string> labels) {
  const std::size_t batch = labels.size();
  const auto ids = dense_label_ids(labels);
  MinedPairs out;
  out.lambda = 0.0;
  out.positives.resize(batch);
  out.negatives.resize(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    for (std::size_t j = 0; j < batch; ++j) {
      if (j == i) continue;
      (ids[i] == ids[j] ? out.positives[i] : out.negatives[i]).push_back(static_cast<std::uint32_t>(j));
    }
  }
  return out;
}

Matrix backprop_similarity(const SimilarityBundle& bundle, const Matrix& grad_similarity) {
  const std::size_t batch = bundle.size();
  const std::size_t d = bundle.unit_embeddings.cols();
  if (grad_similarity.rows() != batch || grad_similarity.cols() != batch)
    throw ShapeMismatch("similarity gradient does not match batch size");

  Matrix grad(batch, d);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < batch; ++i) {
    std::vector<double> gu(d, 0.0);
    for (std::size_t j = 0; j < batch; ++j) {
      const double w = grad_similarity(i, j) + grad_similarity(j, i);
      if (w == 0.0) continue;
      const auto uj = bundle.unit_embeddings.row(j);
      for (std::size_t k = 0; k < d; ++k) gu[k] += w * uj[k];
    }
    // Jacobian of x / |x|:  (I - u u^T) / |x|
    const auto ui = bundle.unit_embeddings.row(i);
    const double radial = dot(gu, ui);
    auto out = grad.row(i);
    for (std::size_t k = 0; k < d; ++k) out[k] = (gu[k] - radial * ui[k]) / bundle.norms[i];
  }
  return grad;
}

}  // namespace selfalign
