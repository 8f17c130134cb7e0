#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fdloss {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.95;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

struct AdamWState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;
};

// One AdamW update with bias correction and decoupled weight decay:
//   p <- p (1 - lr wd);  p <- p - lr m_hat / (sqrt(v_hat) + eps)
void optimizer_step(AdamWState& state, std::span<double> params, std::span<const double> grads,
                    double lr, const AdamWConfig& config);

struct LrSchedule {
  std::size_t total_steps = 0;
  std::size_t warmup_steps = 0;
  double peak_lr = 0.0;
};

// Linear warmup from 0 to peak over warmup_steps, then half-cosine decay to 0 at total_steps.
// Throws for step > total_steps.
double lr_at(std::size_t step, const LrSchedule& schedule);

}  // namespace fdloss
