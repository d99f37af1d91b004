#include "selfalign/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace selfalign::reference {

Matrix encode_batch(const EncoderModel& model, std::span<const std::string> names) {
  const std::size_t d = model.config.embed_dim;
  Matrix out(names.size(), d);
  std::vector<double> pooled(d);
  for (std::size_t i = 0; i < names.size(); ++i) {
    const TokenIds ids = tokenize(names[i], model.config);
    std::fill(pooled.begin(), pooled.end(), 0.0);
    for (auto id : ids)
      for (std::size_t k = 0; k < d; ++k) pooled[k] += model.embedding_table(id, k);
    for (auto& v : pooled) v /= static_cast<double>(ids.size());
    for (std::size_t r = 0; r < d; ++r) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) acc += model.proj_weight(r, k) * pooled[k];
      out(i, r) = acc + model.proj_bias[r];
    }
  }
  return out;
}

Matrix cosine_similarity(const Matrix& x) {
  const std::size_t n = x.rows();
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double xy = 0.0, xx = 0.0, yy = 0.0;
      for (std::size_t k = 0; k < x.cols(); ++k) {
        xy += x(i, k) * x(j, k);
        xx += x(i, k) * x(i, k);
        yy += x(j, k) * x(j, k);
      }
      s(i, j) = xy / (std::sqrt(xx) * std::sqrt(yy));
    }
  return s;
}

MinedPairs mine_hard_pairs(const Matrix& distances, std::span<const std::uint32_t> label_ids, double lambda) {
  const std::size_t b = distances.rows();
  MinedPairs out;
  out.lambda = lambda;
  out.positives.resize(b);
  out.negatives.resize(b);
  for (std::size_t a = 0; a < b; ++a) {
    std::vector<bool> pos(b, false), neg(b, false);
    for (std::size_t p = 0; p < b; ++p) {
      if (p == a || label_ids[p] != label_ids[a]) continue;
      for (std::size_t n = 0; n < b; ++n) {
        if (label_ids[n] == label_ids[a]) continue;
        if (distances(a, p) + lambda > distances(a, n)) pos[p] = neg[n] = true;
      }
    }
    for (std::size_t j = 0; j < b; ++j) {
      if (pos[j]) out.positives[a].push_back(static_cast<std::uint32_t>(j));
      if (neg[j]) out.negatives[a].push_back(static_cast<std::uint32_t>(j));
    }
  }
  return out;
}

std::vector<std::pair<std::size_t, double>> topk(const Matrix& unit_rows, std::span<const double> query,
                                                 std::size_t k) {
  std::vector<std::pair<std::size_t, double>> all(unit_rows.rows());
  for (std::size_t i = 0; i < unit_rows.rows(); ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < query.size(); ++c) s += unit_rows(i, c) * query[c];
    all[i] = {i, s};
  }
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  all.resize(std::min(k, all.size()));
  return all;
}

}  // namespace selfalign::reference
