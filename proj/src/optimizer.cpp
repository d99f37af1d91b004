#include "selfalign/optimizer.hpp"

#include <cmath>

#include "selfalign/errors.hpp"

namespace selfalign {

OptimizerState init_optimizer_state(const EncoderModel& model) {
  const auto& e = model.embedding_table;
  const auto& w = model.proj_weight;
  return OptimizerState{0,
                        Matrix(e.rows(), e.cols()),
                        Matrix(e.rows(), e.cols()),
                        Matrix(w.rows(), w.cols()),
                        Matrix(w.rows(), w.cols()),
                        std::vector<double>(model.proj_bias.size(), 0.0),
                        std::vector<double>(model.proj_bias.size(), 0.0)};
}

namespace {

struct StepConstants {
  double lr, wd, b1, b2, eps, bc1, bc2;
};

inline void update(double& theta, double& m, double& v, double g, double wd,
                   const StepConstants& c) {
  m = c.b1 * m + (1.0 - c.b1) * g;
  v = c.b2 * v + (1.0 - c.b2) * g * g;
  const double m_hat = m / c.bc1;
  const double v_hat = v / c.bc2;
  theta -= c.lr * (m_hat / (std::sqrt(v_hat) + c.eps) + wd * theta);
}

bool all_finite(const std::vector<double>& xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

void adamw_step(EncoderModel& model, const ParamGrads& grads, OptimizerState& state,
                const AdamWParams& params) {
  const std::size_t d = model.config.embed_dim;
  const std::size_t vocab = model.embedding_table.rows();
  if (grads.proj_weight.rows() != d || grads.proj_weight.cols() != d ||
      grads.proj_bias.size() != d || grads.embedding_grads.rows() != grads.embedding_rows.size() ||
      (grads.embedding_grads.rows() != 0 && grads.embedding_grads.cols() != d) ||
      state.m_embedding.rows() != vocab || state.m_weight.rows() != d ||
      state.m_bias.size() != d) {
    throw ShapeMismatch("gradient or optimizer state does not match the model");
  }
  for (std::uint64_t r : grads.embedding_rows)
    if (r >= vocab) throw ShapeMismatch("embedding gradient row out of range");
  if (!all_finite(grads.embedding_grads.values()) || !all_finite(grads.proj_weight.values()) ||
      !all_finite(grads.proj_bias)) {
    throw NonFiniteGradient(state.step + 1);
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const StepConstants c{params.learning_rate,
                        params.weight_decay,
                        params.beta1,
                        params.beta2,
                        params.eps,
                        1.0 - std::pow(params.beta1, t),
                        1.0 - std::pow(params.beta2, t)};

  std::vector<std::int64_t> slot(vocab, -1);
  for (std::size_t s = 0; s < grads.embedding_rows.size(); ++s)
    slot[grads.embedding_rows[s]] = static_cast<std::int64_t>(s);

#pragma omp parallel for schedule(static)
  for (std::size_t r = 0; r < vocab; ++r) {
    auto theta = model.embedding_table.row(r);
    auto m = state.m_embedding.row(r);
    auto v = state.v_embedding.row(r);
    if (slot[r] >= 0) {
      const auto g = grads.embedding_grads.row(static_cast<std::size_t>(slot[r]));
      for (std::size_t k = 0; k < d; ++k) update(theta[k], m[k], v[k], g[k], c.wd, c);
    } else {
      for (std::size_t k = 0; k < d; ++k) update(theta[k], m[k], v[k], 0.0, c.wd, c);
    }
  }

  auto& w = model.proj_weight.values();
  auto& mw = state.m_weight.values();
  auto& vw = state.v_weight.values();
  const auto& gw = grads.proj_weight.values();
  for (std::size_t i = 0; i < w.size(); ++i) update(w[i], mw[i], vw[i], gw[i], c.wd, c);

  for (std::size_t k = 0; k < d; ++k)
    update(model.proj_bias[k], state.m_bias[k], state.v_bias[k], grads.proj_bias[k], 0.0, c);
}

}  // namespace selfalign
