#include "selfalign/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "selfalign/errors.hpp"

namespace selfalign {

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kMultiSimilarity: return "multi_similarity";
    case LossKind::kCosine: return "cosine";
    case LossKind::kTriplet: return "triplet";
    case LossKind::kNca: return "nca";
    case LossKind::kLiftedStructure: return "lifted_structure";
    case LossKind::kInfoNce: return "infonce";
    case LossKind::kCircle: return "circle";
  }
  return "unknown";
}

LossKind parse_loss_kind(std::string_view name) {
  for (LossKind k : kAllLossKinds)
    if (to_string(k) == name) return k;
  throw UnknownLossKind(std::string(name));
}

LossParams default_loss_params(LossKind kind) {
  LossParams p;
  p.kind = kind;
  if (kind == LossKind::kLiftedStructure) p.alpha = 0.5;
  if (kind == LossKind::kCosine) p.margin = 0.0;
  return p;
}

void LossParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0) throw ConfigError(std::string(name) + " must be finite and > 0");
  };
  auto finite = [](double v, const char* name) {
    if (!std::isfinite(v)) throw ConfigError(std::string(name) + " must be finite");
  };
  switch (kind) {
    case LossKind::kMultiSimilarity:
      positive(alpha, "alpha");
      positive(beta, "beta");
      finite(epsilon, "epsilon");
      break;
    case LossKind::kCosine:
      finite(margin, "margin");
      if (margin < -1.0 || margin > 1.0) throw ConfigError("cosine margin must lie in [-1, 1]");
      break;
    case LossKind::kTriplet:
      finite(margin, "margin");
      if (margin < 0.0) throw ConfigError("triplet margin must be >= 0");
      break;
    case LossKind::kNca: positive(scale, "scale"); break;
    case LossKind::kLiftedStructure: finite(alpha, "alpha"); break;
    case LossKind::kInfoNce: positive(tau, "tau"); break;
    case LossKind::kCircle:
      finite(m, "m");
      positive(gamma, "gamma");
      break;
  }
}

namespace {

// Below this a chordal distance is treated as zero and its derivative dropped.
constexpr double kDistanceFloor = 1e-12;

// log(sum_k e^{z_k}); `weights` receives the softmax. Empty z gives -inf.
double log_sum_exp(std::span<const double> z, std::span<double> weights) {
  if (z.empty()) return -std::numeric_limits<double>::infinity();
  const double shift = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) sum += (weights[k] = std::exp(z[k] - shift));
  for (std::size_t k = 0; k < z.size(); ++k) weights[k] /= sum;
  return shift + std::log(sum);
}

// log(1 + sum_k e^{z_k}); `weights` receives e^{z_k} / (1 + sum e^z).
double log1p_sum_exp(std::span<const double> z, std::span<double> weights) {
  double shift = 0.0;
  for (double v : z) shift = std::max(shift, v);
  double sum = std::exp(-shift);
  for (std::size_t k = 0; k < z.size(); ++k) sum += (weights[k] = std::exp(z[k] - shift));
  for (std::size_t k = 0; k < z.size(); ++k) weights[k] /= sum;
  return shift + std::log(sum);
}

double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double chordal(double s) { return std::sqrt(std::max(0.0, 2.0 - 2.0 * s)); }

// dD/dS for D = sqrt(2 - 2S).
double chordal_slope(double dist) { return dist > kDistanceFloor ? -1.0 / dist : 0.0; }

double serial_sum(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s;
}

SimilarityLoss multi_similarity(const Matrix& S, const MinedPairs& pairs, const LossParams& p) {
  const std::size_t batch = S.rows();
  SimilarityLoss out{0.0, Matrix(batch, batch)};
  std::vector<double> per_anchor(batch, 0.0);
  const double inv_b = 1.0 / static_cast<double>(batch);

#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t i = 0; i < batch; ++i) {
    const auto& neg = pairs.negatives[i];
    const auto& pos = pairs.positives[i];
    std::vector<double> z(std::max(neg.size(), pos.size())), w(z.size());
    double term = 0.0;
    if (!neg.empty()) {
      for (std::size_t k = 0; k < neg.size(); ++k) z[k] = p.alpha * (S(i, neg[k]) - p.epsilon);
      term += log1p_sum_exp({z.data(), neg.size()}, {w.data(), neg.size()}) / p.alpha;
      for (std::size_t k = 0; k < neg.size(); ++k) out.grad_similarity(i, neg[k]) = inv_b * w[k];
    }
    if (!pos.empty()) {
      for (std::size_t k = 0; k < pos.size(); ++k) z[k] = -p.beta * (S(i, pos[k]) - p.epsilon);
      term += log1p_sum_exp({z.data(), pos.size()}, {w.data(), pos.size()}) / p.beta;
      for (std::size_t k = 0; k < pos.size(); ++k) out.grad_similarity(i, pos[k]) = -inv_b * w[k];
    }
    per_anchor[i] = term;
  }
  out.value = inv_b * serial_sum(per_anchor);
  return out;
}

SimilarityLoss cosine(const Matrix& S, const MinedPairs& pairs, const LossParams& p) {
  const std::size_t batch = S.rows();
  SimilarityLoss out{0.0, Matrix(batch, batch)};
  const std::size_t n_pos = pairs.positive_count();
  const std::size_t n_neg = pairs.negative_count();
  const double w_pos = n_pos ? 1.0 / static_cast<double>(n_pos) : 0.0;
  const double w_neg = n_neg ? 1.0 / static_cast<double>(n_neg) : 0.0;
  std::vector<double> pos_sum(batch, 0.0), neg_sum(batch, 0.0);

#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < batch; ++i) {
    for (auto j : pairs.positives[i]) {
      pos_sum[i] += 1.0 - S(i, j);
      out.grad_similarity(i, j) = -w_pos;
    }
    for (auto j : pairs.negatives[i]) {
      const double excess = S(i, j) - p.margin;
      if (excess > 0.0) {
        neg_sum[i] += excess;
        out.grad_similarity(i, j) = w_neg;
      }
    }
  }
  out.value = w_pos * serial_sum(pos_sum) + w_neg * serial_sum(neg_sum);
  return out;
}

SimilarityLoss triplet(const Matrix& S, const MinedPairs& pairs, const LossParams& p) {
  const std::size_t batch = S.rows();
  SimilarityLoss out{0.0, Matrix(batch, batch)};
  std::size_t n_triplets = 0;
  for (std::size_t a = 0; a < batch; ++a) n_triplets += pairs.positives[a].size() * pairs.negatives[a].size();
  if (n_triplets == 0) return out;
  const double w = 1.0 / static_cast<double>(n_triplets);
  std::vector<double> per_anchor(batch, 0.0);

#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t a = 0; a < batch; ++a) {
    for (auto pi : pairs.positives[a]) {
      const double d_ap = chordal(S(a, pi));
      for (auto ni : pairs.negatives[a]) {
        const double d_an = chordal(S(a, ni));
        const double hinge = d_ap - d_an + p.margin;
        if (hinge <= 0.0) continue;
        per_anchor[a] += hinge;
        out.grad_similarity(a, pi) += w * chordal_slope(d_ap);
        out.grad_similarity(a, ni) -= w * chordal_slope(d_an);
      }
    }
  }
  out.value = w * serial_sum(per_anchor);
  return out;
}

SimilarityLoss nca(const Matrix& S, const MinedPairs& pairs, const LossParams& p) {
  const std::size_t batch = S.rows();
  SimilarityLoss out{0.0, Matrix(batch, batch)};
  std::vector<double> per_anchor(batch, 0.0);
  const double inv_b = 1.0 / static_cast<double>(batch);

#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t i = 0; i < batch; ++i) {
    const auto& pos = pairs.positives[i];
    const auto& neg = pairs.negatives[i];
    if (pos.empty()) continue;
    const std::size_t n_all = pos.size() + neg.size();
    std::vector<double> z(n_all), w_all(n_all), w_pos(pos.size());
    for (std::size_t k = 0; k < pos.size(); ++k) z[k] = p.scale * S(i, pos[k]);
    for (std::size_t k = 0; k < neg.size(); ++k) z[pos.size() + k] = p.scale * S(i, neg[k]);
    const double lse_pos = log_sum_exp({z.data(), pos.size()}, w_pos);
    const double lse_all = log_sum_exp(z, w_all);
    per_anchor[i] = lse_all - lse_pos;
    for (std::size_t k = 0; k < pos.size(); ++k)
      out.grad_similarity(i, pos[k]) = inv_b * p.scale * (w_all[k] - w_pos[k]);
    for (std::size_t k = 0; k < neg.size(); ++k)
      out.grad_similarity(i, neg[k]) = inv_b * p.scale * w_all[pos.size() + k];
  }
  out.value = inv_b * serial_sum(per_anchor);
  return out;
}

SimilarityLoss lifted_structure(const Matrix& S, const MinedPairs& pairs, const LossParams& p) {
  const std::size_t batch = S.rows();
  SimilarityLoss out{0.0, Matrix(batch, batch)};

  // Unordered mined positive pairs, each counted once.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> unordered;
  for (std::size_t i = 0; i < batch; ++i)
    for (auto j : pairs.positives[i])
      unordered.emplace_back(std::min<std::uint32_t>(i, j), std::max<std::uint32_t>(i, j));
  std::sort(unordered.begin(), unordered.end());
  unordered.erase(std::unique(unordered.begin(), unordered.end()), unordered.end());
  if (unordered.empty()) return out;
  const double inv_count = 1.0 / static_cast<double>(unordered.size());

  std::vector<double> z, w;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> owners;
  double total = 0.0;
  for (const auto& [i, j] : unordered) {
    z.clear();
    owners.clear();
    for (auto k : pairs.negatives[i]) {
      z.push_back(p.alpha - chordal(S(i, k)));
      owners.emplace_back(i, k);
    }
    for (auto l : pairs.negatives[j]) {
      z.push_back(p.alpha - chordal(S(j, l)));
      owners.emplace_back(j, l);
    }
    if (z.empty()) continue;
    w.resize(z.size());
    const double d_ij = chordal(S(i, j));
    const double big_j = d_ij + log_sum_exp(z, w);
    if (big_j <= 0.0) continue;
    total += big_j * big_j;
    const double dl_dj = big_j * inv_count;  // d/dJ of J^2 / (2|P|)
    out.grad_similarity(i, j) += dl_dj * chordal_slope(d_ij);
    for (std::size_t k = 0; k < z.size(); ++k) {
      const auto [r, c] = owners[k];
      // dJ/dD_rc = -w_k
      out.grad_similarity(r, c) -= dl_dj * w[k] * chordal_slope(chordal(S(r, c)));
    }
  }
  out.value = 0.5 * inv_count * total;
  return out;
}

SimilarityLoss infonce(const Matrix& S, const MinedPairs& pairs, const LossParams& p) {
  const std::size_t batch = S.rows();
  SimilarityLoss out{0.0, Matrix(batch, batch)};
  std::size_t n_terms = 0;
  for (std::size_t i = 0; i < batch; ++i)
    if (!pairs.negatives[i].empty()) n_terms += pairs.positives[i].size();
  if (n_terms == 0) return out;
  const double inv_n = 1.0 / static_cast<double>(n_terms);
  const double inv_tau = 1.0 / p.tau;
  std::vector<double> per_anchor(batch, 0.0);

#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t i = 0; i < batch; ++i) {
    const auto& pos = pairs.positives[i];
    const auto& neg = pairs.negatives[i];
    if (neg.empty() || pos.empty()) continue;
    std::vector<double> z(neg.size() + 1), w(z.size());
    for (std::size_t k = 0; k < neg.size(); ++k) z[k + 1] = S(i, neg[k]) * inv_tau;
    for (auto pi : pos) {
      z[0] = S(i, pi) * inv_tau;
      per_anchor[i] += log_sum_exp(z, w) - z[0];
      out.grad_similarity(i, pi) += inv_n * inv_tau * (w[0] - 1.0);
      for (std::size_t k = 0; k < neg.size(); ++k)
        out.grad_similarity(i, neg[k]) += inv_n * inv_tau * w[k + 1];
    }
  }
  out.value = inv_n * serial_sum(per_anchor);
  return out;
}

SimilarityLoss circle(const Matrix& S, const MinedPairs& pairs, const LossParams& p) {
  const std::size_t batch = S.rows();
  SimilarityLoss out{0.0, Matrix(batch, batch)};
  std::vector<double> per_anchor(batch, 0.0);
  const double inv_b = 1.0 / static_cast<double>(batch);
  const double delta_p = 1.0 - p.m;
  const double delta_n = p.m;

#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t i = 0; i < batch; ++i) {
    const auto& pos = pairs.positives[i];
    const auto& neg = pairs.negatives[i];
    if (pos.empty() || neg.empty()) continue;
    std::vector<double> zn(neg.size()), wn(neg.size()), dzn(neg.size());
    std::vector<double> zp(pos.size()), wp(pos.size()), dzp(pos.size());
    for (std::size_t k = 0; k < neg.size(); ++k) {
      const double s = S(i, neg[k]);
      const double a_n = std::max(0.0, s + p.m);
      zn[k] = p.gamma * a_n * (s - delta_n);
      dzn[k] = a_n > 0.0 ? p.gamma * (a_n + (s - delta_n)) : 0.0;
    }
    for (std::size_t k = 0; k < pos.size(); ++k) {
      const double s = S(i, pos[k]);
      const double a_p = std::max(0.0, 1.0 + p.m - s);
      zp[k] = -p.gamma * a_p * (s - delta_p);
      dzp[k] = a_p > 0.0 ? -p.gamma * (a_p - (s - delta_p)) : 0.0;
    }
    const double t = log_sum_exp(zn, wn) + log_sum_exp(zp, wp);
    per_anchor[i] = softplus(t);
    const double g = inv_b * sigmoid(t);
    for (std::size_t k = 0; k < neg.size(); ++k) out.grad_similarity(i, neg[k]) = g * wn[k] * dzn[k];
    for (std::size_t k = 0; k < pos.size(); ++k) out.grad_similarity(i, pos[k]) = g * wp[k] * dzp[k];
  }
  out.value = inv_b * serial_sum(per_anchor);
  return out;
}

}  // namespace

SimilarityLoss loss_on_similarity(const Matrix& similarity, const MinedPairs& pairs,
                                  const LossParams& params) {
  const std::size_t batch = similarity.rows();
  if (similarity.cols() != batch || pairs.positives.size() != batch || pairs.negatives.size() != batch)
    throw ShapeMismatch("similarity matrix and mined pairs disagree on batch size");
  params.validate();
  switch (params.kind) {
    case LossKind::kMultiSimilarity: return multi_similarity(similarity, pairs, params);
    case LossKind::kCosine: return cosine(similarity, pairs, params);
    case LossKind::kTriplet: return triplet(similarity, pairs, params);
    case LossKind::kNca: return nca(similarity, pairs, params);
    case LossKind::kLiftedStructure: return lifted_structure(similarity, pairs, params);
    case LossKind::kInfoNce: return infonce(similarity, pairs, params);
    case LossKind::kCircle: return circle(similarity, pairs, params);
  }
  throw UnknownLossKind("?");
}

LossOutput compute_loss(const SimilarityBundle& bundle, const MinedPairs& pairs,
                        const LossParams& params) {
  auto s = loss_on_similarity(bundle.similarity, pairs, params);
  return {s.value, backprop_similarity(bundle, s.grad_similarity)};
}

namespace {

LossOutput with_kind(LossKind kind, const SimilarityBundle& b, const MinedPairs& pairs, LossParams p) {
  p.kind = kind;
  return compute_loss(b, pairs, p);
}

}  // namespace

LossOutput ms_loss(const SimilarityBundle& b, const MinedPairs& pairs, const LossParams& p) {
  return with_kind(LossKind::kMultiSimilarity, b, pairs, p);
}
LossOutput cosine_loss(const SimilarityBundle& b, const MinedPairs& pairs, const LossParams& p) {
  return with_kind(LossKind::kCosine, b, pairs, p);
}
LossOutput triplet_loss(const SimilarityBundle& b, const MinedPairs& pairs, const LossParams& p) {
  return with_kind(LossKind::kTriplet, b, pairs, p);
}
LossOutput nca_loss(const SimilarityBundle& b, const MinedPairs& pairs, const LossParams& p) {
  return with_kind(LossKind::kNca, b, pairs, p);
}
LossOutput lifted_structure_loss(const SimilarityBundle& b, const MinedPairs& pairs, const LossParams& p) {
  return with_kind(LossKind::kLiftedStructure, b, pairs, p);
}
LossOutput infonce_loss(const SimilarityBundle& b, const MinedPairs& pairs, const LossParams& p) {
  return with_kind(LossKind::kInfoNce, b, pairs, p);
}
LossOutput circle_loss(const SimilarityBundle& b, const MinedPairs& pairs, const LossParams& p) {
  return with_kind(LossKind::kCircle, b, pairs, p);
}

RegisteredLoss loss_registry(std::string_view kind) {
  const LossKind k = parse_loss_kind(kind);
  LossFn fn;
  switch (k) {
    case LossKind::kMultiSimilarity: fn = ms_loss; break;
    case LossKind::kCosine: fn = cosine_loss; break;
    case LossKind::kTriplet: fn = triplet_loss; break;
    case LossKind::kNca: fn = nca_loss; break;
    case LossKind::kLiftedStructure: fn = lifted_structure_loss; break;
    case LossKind::kInfoNce: fn = infonce_loss; break;
    case LossKind::kCircle: fn = circle_loss; break;
  }
  return {fn, default_loss_params(k)};
}

}  // namespace selfalign
