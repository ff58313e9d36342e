#pragma once

#include "nc/mlp.hpp"
#include "nc/types.hpp"

#include <cstdint>
#include <vector>

namespace nc {

// Classic coupled-decay SGD with momentum:
//   buffer <- momentum * buffer + (grad + weight_decay * param)
//   param  <- param - lr * buffer
struct SgdState {
  std::vector<LayerParams> momentum;  // shape-matched zero-initialized buffers
  double momentum_coeff = 0.9;
  double weight_decay = 1e-5;

  explicit SgdState(const MlpModel& model, double momentum_coeff = 0.9,
                    double weight_decay = 1e-5);
};

void sgd_step(MlpModel& model, const Gradients& grads, SgdState& state,
              double lr);

// Piecewise-cosine one-cycle schedule: max_lr/start_div rises to max_lr over
// the warmup fraction, then decays to max_lr/final_div.
struct OneCycleSchedule {
  double max_lr = 0.05;
  std::int64_t total_steps = 0;
  double warmup_fraction = 0.3;
  double start_div = 25.0;
  double final_div = 1e4;
};

double lr_at(const OneCycleSchedule& schedule, std::int64_t step);

}  // namespace nc
