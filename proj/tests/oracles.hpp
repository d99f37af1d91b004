// Independent oracles for tests and the acceptance suite. Written straight
// from the loss definitions in long double, without the library's
// max-shifted log-sum-exp or any of its helpers.
#ifndef SELFALIGN_TESTS_ORACLES_HPP_
#define SELFALIGN_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "selfalign/losses.hpp"
#include "selfalign/matrix.hpp"
#include "selfalign/metric.hpp"

namespace oracle {

using selfalign::LossKind;
using selfalign::LossParams;
using selfalign::Matrix;
using selfalign::MinedPairs;

using ld = long double;

inline ld dist(ld s) { return std::sqrt(std::max<ld>(0.0L, 2.0L - 2.0L * s)); }

inline ld ms(const Matrix& S, const MinedPairs& P, const LossParams& p) {
  const std::size_t B = S.rows();
  ld total = 0;
  for (std::size_t i = 0; i < B; ++i) {
    ld neg = 0, pos = 0;
    for (auto n : P.negatives[i]) neg += std::exp(ld(p.alpha) * (S(i, n) - ld(p.epsilon)));
    for (auto q : P.positives[i]) pos += std::exp(-ld(p.beta) * (S(i, q) - ld(p.epsilon)));
    total += std::log(1 + neg) / ld(p.alpha) + std::log(1 + pos) / ld(p.beta);
  }
  return total / ld(B);
}

inline ld cosine(const Matrix& S, const MinedPairs& P, const LossParams& p) {
  ld pos = 0, neg = 0;
  std::size_t np = 0, nn = 0;
  for (std::size_t i = 0; i < S.rows(); ++i) {
    for (auto q : P.positives[i]) pos += 1 - ld(S(i, q)), ++np;
    for (auto n : P.negatives[i]) neg += std::max<ld>(0, ld(S(i, n)) - ld(p.margin)), ++nn;
  }
  return (np ? pos / ld(np) : 0) + (nn ? neg / ld(nn) : 0);
}

inline ld triplet(const Matrix& S, const MinedPairs& P, const LossParams& p) {
  ld total = 0;
  std::size_t count = 0;
  for (std::size_t a = 0; a < S.rows(); ++a)
    for (auto q : P.positives[a])
      for (auto n : P.negatives[a]) {
        total += std::max<ld>(0, dist(S(a, q)) - dist(S(a, n)) + ld(p.margin));
        ++count;
      }
  return count ? total / ld(count) : 0;
}

inline ld nca(const Matrix& S, const MinedPairs& P, const LossParams& p) {
  ld total = 0;
  for (std::size_t i = 0; i < S.rows(); ++i) {
    if (P.positives[i].empty()) continue;
    ld num = 0, den = 0;
    for (auto q : P.positives[i]) num += std::exp(ld(p.scale) * S(i, q));
    den = num;
    for (auto n : P.negatives[i]) den += std::exp(ld(p.scale) * S(i, n));
    total -= std::log(num / den);
  }
  return total / ld(S.rows());
}

inline ld lifted(const Matrix& S, const MinedPairs& P, const LossParams& p) {
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < S.rows(); ++i)
    for (auto j : P.positives[i]) pairs.insert({std::min<std::size_t>(i, j), std::max<std::size_t>(i, j)});
  if (pairs.empty()) return 0;
  ld total = 0;
  for (auto [i, j] : pairs) {
    ld sum = 0;
    for (auto k : P.negatives[i]) sum += std::exp(ld(p.alpha) - dist(S(i, k)));
    for (auto l : P.negatives[j]) sum += std::exp(ld(p.alpha) - dist(S(j, l)));
    if (P.negatives[i].empty() && P.negatives[j].empty()) continue;
    const ld J = dist(S(i, j)) + std::log(sum);
    if (J > 0) total += J * J;
  }
  return total / (2 * ld(pairs.size()));
}

inline ld infonce(const Matrix& S, const MinedPairs& P, const LossParams& p) {
  ld total = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < S.rows(); ++i) {
    if (P.negatives[i].empty()) continue;
    ld negs = 0;
    for (auto n : P.negatives[i]) negs += std::exp(ld(S(i, n)) / ld(p.tau));
    for (auto q : P.positives[i]) {
      const ld e = std::exp(ld(S(i, q)) / ld(p.tau));
      total -= std::log(e / (e + negs));
      ++count;
    }
  }
  return count ? total / ld(count) : 0;
}

inline ld circle(const Matrix& S, const MinedPairs& P, const LossParams& p) {
  ld total = 0;
  const ld m = p.m, g = p.gamma;
  for (std::size_t i = 0; i < S.rows(); ++i) {
    if (P.positives[i].empty() || P.negatives[i].empty()) continue;
    ld sn = 0, sp = 0;
    for (auto n : P.negatives[i]) {
      const ld s = S(i, n), a = std::max<ld>(0, s + m);
      sn += std::exp(g * a * (s - m));
    }
    for (auto q : P.positives[i]) {
      const ld s = S(i, q), a = std::max<ld>(0, 1 + m - s);
      sp += std::exp(-g * a * (s - (1 - m)));
    }
    total += std::log1p(sn * sp);
  }
  return total / ld(S.rows());
}

inline ld loss(const Matrix& S, const MinedPairs& P, const LossParams& p) {
  switch (p.kind) {
    case LossKind::kMultiSimilarity: return ms(S, P, p);
    case LossKind::kCosine: return cosine(S, P, p);
    case LossKind::kTriplet: return triplet(S, P, p);
    case LossKind::kNca: return nca(S, P, p);
    case LossKind::kLiftedStructure: return lifted(S, P, p);
    case LossKind::kInfoNce: return infonce(S, P, p);
    case LossKind::kCircle: return circle(S, P, p);
  }
  return 0;
}

// Cosine similarity by a double loop, each entry from scratch.
inline Matrix naive_similarity(const Matrix& x) {
  Matrix s(x.rows(), x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.rows(); ++j) {
      ld xy = 0, xx = 0, yy = 0;
      for (std::size_t k = 0; k < x.cols(); ++k) {
        xy += ld(x(i, k)) * x(j, k);
        xx += ld(x(i, k)) * x(i, k);
        yy += ld(x(j, k)) * x(j, k);
      }
      s(i, j) = double(xy / std::sqrt(xx * yy));
    }
  return s;
}

// Loss value on raw embeddings with the pair sets held fixed.
inline ld loss_on_embeddings(const Matrix& x, const MinedPairs& P, const LossParams& p) {
  return loss(naive_similarity(x), P, p);
}

// Distance (in S or D units) from the nearest non-differentiable point of a
// loss, given the similarity matrix and the pair sets. Large when smooth.
inline double kink_distance(const Matrix& S, const MinedPairs& P, const LossParams& p) {
  double best = 1e300;
  auto upd = [&](double v) { best = std::min(best, std::abs(v)); };
  for (std::size_t i = 0; i < S.rows(); ++i) {
    switch (p.kind) {
      case LossKind::kCosine:
        for (auto n : P.negatives[i]) upd(S(i, n) - p.margin);
        break;
      case LossKind::kTriplet:
        for (auto q : P.positives[i]) {
          upd(double(dist(S(i, q))));
          for (auto n : P.negatives[i]) upd(double(dist(S(i, q)) - dist(S(i, n))) + p.margin);
        }
        break;
      case LossKind::kLiftedStructure:
        for (auto j : P.positives[i]) {
          upd(double(dist(S(i, j))));
          ld sum = 0;
          for (auto k : P.negatives[i]) sum += std::exp(ld(p.alpha) - dist(S(i, k)));
          for (auto l : P.negatives[j]) sum += std::exp(ld(p.alpha) - dist(S(j, l)));
          if (sum > 0) upd(double(dist(S(i, j)) + std::log(sum)));
        }
        break;
      case LossKind::kCircle:
        for (auto n : P.negatives[i]) upd(S(i, n) + p.m);
        for (auto q : P.positives[i]) upd(1 + p.m - S(i, q));
        break;
      default:
        break;
    }
  }
  return best;
}

// Central difference of f at every coordinate of `x`.
inline Matrix central_difference(Matrix x, const std::function<ld(const Matrix&)>& f, double h) {
  Matrix g(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t k = 0; k < x.cols(); ++k) {
      const double orig = x(i, k);
      x(i, k) = orig + h;
      const ld up = f(x);
      x(i, k) = orig - h;
      const ld down = f(x);
      x(i, k) = orig;
      g(i, k) = double((up - down) / (2 * ld(h)));
    }
  return g;
}

inline double max_relative_error(const Matrix& analytic, const Matrix& numeric) {
  double worst = 0;
  for (std::size_t i = 0; i < analytic.values().size(); ++i) {
    const double a = analytic.values()[i], n = numeric.values()[i];
    worst = std::max(worst, std::abs(a - n) / std::max(1.0, std::abs(a)));
  }
  return worst;
}

// O(B^3) triplet enumeration straight from the selection rule, on D = sqrt(2 - 2S).
inline MinedPairs brute_force_mine(const Matrix& S, const std::vector<std::uint32_t>& labels, double lambda) {
  const std::size_t B = S.rows();
  MinedPairs out;
  out.positives.resize(B);
  out.negatives.resize(B);
  std::vector<std::set<std::uint32_t>> pos(B), neg(B);
  for (std::size_t a = 0; a < B; ++a)
    for (std::size_t p = 0; p < B; ++p)
      for (std::size_t n = 0; n < B; ++n) {
        if (p == a || labels[p] != labels[a] || labels[n] == labels[a]) continue;
        const double dap = std::sqrt(std::max(0.0, 2.0 - 2.0 * S(a, p)));
        const double dan = std::sqrt(std::max(0.0, 2.0 - 2.0 * S(a, n)));
        if (dap + lambda > dan) {
          pos[a].insert(std::uint32_t(p));
          neg[a].insert(std::uint32_t(n));
        }
      }
  for (std::size_t a = 0; a < B; ++a) {
    out.positives[a].assign(pos[a].begin(), pos[a].end());
    out.negatives[a].assign(neg[a].begin(), neg[a].end());
  }
  return out;
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (auto& v : m.values()) v = u(rng);
  return m;
}

inline std::vector<std::string> random_labels(std::mt19937_64& rng, std::size_t B, std::size_t n_labels) {
  std::vector<std::string> labels(B);
  for (auto& l : labels) l = "L" + std::to_string(std::uniform_int_distribution<std::size_t>(0, n_labels - 1)(rng));
  return labels;
}

inline std::string random_word(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  std::string s(std::uniform_int_distribution<std::size_t>(lo, hi)(rng), 'a');
  for (auto& ch : s) ch = char('a' + std::uniform_int_distribution<int>(0, 25)(rng));
  return s;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  auto dir = std::filesystem::temp_directory_path() / ("selfalign_" + tag + "_" + std::to_string(rng()));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle

#endif  // SELFALIGN_TESTS_ORACLES_HPP_
