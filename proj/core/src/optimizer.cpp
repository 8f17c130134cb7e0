#include "fdloss/optimizer.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fdloss/error.hpp"

namespace fdloss {

void optimizer_step(AdamWState& state, std::span<double> params, std::span<const double> grads,
                    double lr, const AdamWConfig& config) {
  if (params.size() != grads.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "optimizer_step: parameter and gradient sizes differ");
  }
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "optimizer_step: state size does not match parameters");
  }
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  const double decay = 1.0 - lr * config.weight_decay;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = grads[k];
    state.m[k] = config.beta1 * state.m[k] + (1.0 - config.beta1) * g;
    state.v[k] = config.beta2 * state.v[k] + (1.0 - config.beta2) * g * g;
    const double m_hat = state.m[k] / correction1;
    const double v_hat = state.v[k] / correction2;
    params[k] = params[k] * decay - lr * m_hat / (std::sqrt(v_hat) + config.eps);
  }
}

double lr_at(std::size_t step, const LrSchedule& schedule) {
  if (step > schedule.total_steps) {
    throw Error(ErrorKind::kInvalidArgument,
                "lr_at: step " + std::to_string(step) + " beyond total " +
                    std::to_string(schedule.total_steps));
  }
  if (step < schedule.warmup_steps) {
    return schedule.peak_lr * static_cast<double>(step) /
           static_cast<double>(schedule.warmup_steps);
  }
  const std::size_t decay_steps = schedule.total_steps - schedule.warmup_steps;
  if (decay_steps == 0) return schedule.peak_lr;
  const double progress =
      static_cast<double>(step - schedule.warmup_steps) / static_cast<double>(decay_steps);
  return schedule.peak_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace fdloss
