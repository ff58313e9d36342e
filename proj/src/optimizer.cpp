#include "nc/optimizer.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nc {

SgdState::SgdState(const MlpModel& model, double momentum_coeff,
                   double weight_decay)
    : momentum_coeff(momentum_coeff), weight_decay(weight_decay) {
  momentum.resize(model.layers.size());
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    momentum[k].weight = Matrix::Zero(model.layers[k].weight.rows(),
                                      model.layers[k].weight.cols());
    momentum[k].bias = Vector::Zero(model.layers[k].bias.size());
  }
}

void sgd_step(MlpModel& model, const Gradients& grads, SgdState& state,
              double lr) {
  if (grads.size() != model.layers.size() ||
      state.momentum.size() != model.layers.size())
    throw std::invalid_argument("sgd_step: layer count mismatch");
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    LayerParams& param = model.layers[k];
    LayerParams& buffer = state.momentum[k];
    if (grads[k].weight.rows() != param.weight.rows() ||
        grads[k].weight.cols() != param.weight.cols() ||
        grads[k].bias.size() != param.bias.size())
      throw std::invalid_argument("sgd_step: gradient shape mismatch at layer " +
                                  std::to_string(k));
    buffer.weight = state.momentum_coeff * buffer.weight +
                    (grads[k].weight + state.weight_decay * param.weight);
    buffer.bias = state.momentum_coeff * buffer.bias +
                  (grads[k].bias + state.weight_decay * param.bias);
    param.weight -= lr * buffer.weight;
    param.bias -= lr * buffer.bias;
  }
}

double lr_at(const OneCycleSchedule& schedule, std::int64_t step) {
  if (step < 0 || step > schedule.total_steps)
    throw std::out_of_range("lr_at: step " + std::to_string(step) +
                            " outside [0, " +
                            std::to_string(schedule.total_steps) + "]");
  const double start_lr = schedule.max_lr / schedule.start_div;
  const double final_lr = schedule.max_lr / schedule.final_div;
  const auto warmup = static_cast<std::int64_t>(std::llround(
      schedule.warmup_fraction * static_cast<double>(schedule.total_steps)));

  if (step < warmup) {
    const double t = static_cast<double>(step) / static_cast<double>(warmup);
    return start_lr +
           (schedule.max_lr - start_lr) * 0.5 * (1.0 - std::cos(std::numbers::pi * t));
  }
  const std::int64_t decay_steps = schedule.total_steps - warmup;
  if (decay_steps == 0) return schedule.max_lr;
  const double t =
      static_cast<double>(step - warmup) / static_cast<double>(decay_steps);
  return final_lr +
         (schedule.max_lr - final_lr) * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

}  // namespace nc
