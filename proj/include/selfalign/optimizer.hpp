#ifndef SELFALIGN_OPTIMIZER_HPP_
#define SELFALIGN_OPTIMIZER_HPP_

#include <cstdint>
#include <vector>

#include "selfalign/encoder.hpp"
#include "selfalign/matrix.hpp"

namespace selfalign {

struct AdamWParams {
  double learning_rate = 2e-5;
  double weight_decay = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment accumulators mirroring EncoderModel's tensors.
struct OptimizerState {
  std::uint64_t step = 0;
  Matrix m_embedding, v_embedding;
  Matrix m_weight, v_weight;
  std::vector<double> m_bias, v_bias;

  bool operator==(const OptimizerState&) const = default;
};

OptimizerState init_optimizer_state(const EncoderModel& model);

/// One decoupled-weight-decay Adam step over every parameter (untouched
/// embedding rows see a zero gradient but still decay). The projection bias
/// is exempt from weight decay. Throws NonFiniteGradient before touching any
/// state if a gradient entry is NaN or infinite.
void adamw_step(EncoderModel& model, const ParamGrads& grads, OptimizerState& state,
                const AdamWParams& params);

}  // namespace selfalign

#endif  // SELFALIGN_OPTIMIZER_HPP_
