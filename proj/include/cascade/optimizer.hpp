#pragma once

#include "cascade/params.hpp"

#include <cstdint>

namespace cascade::nn {

struct AdamConfig {
  float lr = 2e-5f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
  std::uint64_t warmup_steps = 0; // 0 disables warmup
  std::uint64_t total_steps = 0;  // 0 disables the cosine decay
};

// Adam with bias correction, linear warmup from zero and cosine decay to
// zero over [warmup_steps, total_steps].
class Adam {
public:
  Adam(const ParameterSet<float>& params, AdamConfig config);

  // Learning rate applied at a given 1-based step.
  float effective_lr(std::uint64_t step) const;

  // One update; grads must mirror the parameter set exactly.
  void step(ParameterSet<float>& params, const ParameterSet<float>& grads);

  std::uint64_t steps_done() const { return step_; }
  const AdamConfig& config() const { return config_; }

private:
  AdamConfig config_;
  ParameterSet<float> m_;
  ParameterSet<float> v_;
  std::uint64_t step_ = 0;
};

} // namespace cascade::nn
