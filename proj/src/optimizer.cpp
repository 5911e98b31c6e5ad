#include "cascade/optimizer.hpp"

#include "cascade/encoder.hpp"
#include "cascade/errors.hpp"

#include <cmath>

namespace cascade::nn {

Adam::Adam(const ParameterSet<float>& params, AdamConfig config)
    : config_(config), m_(zeros_like(params)), v_(zeros_like(params)) {
  if (config_.lr <= 0.0f || config_.eps <= 0.0f) throw UsageError("Adam: lr and eps must be > 0");
  if (config_.beta1 < 0.0f || config_.beta1 >= 1.0f || config_.beta2 < 0.0f ||
      config_.beta2 >= 1.0f) {
    throw UsageError("Adam: betas must lie in [0, 1)");
  }
  if (config_.total_steps != 0 && config_.total_steps < config_.warmup_steps) {
    throw UsageError("Adam: total_steps must cover the warmup");
  }
}

float Adam::effective_lr(std::uint64_t step) const {
  double factor = 1.0;
  if (config_.warmup_steps > 0 && step < config_.warmup_steps) {
    factor = static_cast<double>(step) / static_cast<double>(config_.warmup_steps);
  } else if (config_.total_steps > config_.warmup_steps && step > config_.warmup_steps) {
    const double progress = static_cast<double>(step - config_.warmup_steps) /
                            static_cast<double>(config_.total_steps - config_.warmup_steps);
    factor = 0.5 * (1.0 + std::cos(3.14159265358979323846 * std::min(progress, 1.0)));
  }
  return static_cast<float>(config_.lr * factor);
}

void Adam::step(ParameterSet<float>& params, const ParameterSet<float>& grads) {
  if (params.count() != m_.count() || grads.count() != m_.count()) {
    throw UsageError("Adam::step: parameter/gradient set size mismatch");
  }
  ++step_;
  const float lr = effective_lr(step_);
  const double bc1 = 1.0 - std::pow(static_cast<double>(config_.beta1), static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(static_cast<double>(config_.beta2), static_cast<double>(step_));
  for (std::size_t i = 0; i < m_.count(); ++i) {
    const std::string& name = m_.names()[i];
    if (params.names()[i] != name || grads.names()[i] != name) {
      throw UsageError("Adam::step: parameter name order mismatch at '" + name + "'");
    }
    Tensor<float>& theta = params.tensor(i);
    const Tensor<float>& g = grads.tensor(i);
    Tensor<float>& m = m_.tensor(i);
    Tensor<float>& v = v_.tensor(i);
    if (!theta.same_shape(g) || !theta.same_shape(m)) {
      throw UsageError("Adam::step: shape mismatch for '" + name + "'");
    }
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const float gj = g.data[j];
      m.data[j] = config_.beta1 * m.data[j] + (1.0f - config_.beta1) * gj;
      v.data[j] = config_.beta2 * v.data[j] + (1.0f - config_.beta2) * gj * gj;
      const float mhat = static_cast<float>(m.data[j] / bc1);
      const float vhat = static_cast<float>(v.data[j] / bc2);
      theta.data[j] -= lr * mhat / (std::sqrt(vhat) + config_.eps);
    }
  }
}

} // namespace cascade::nn
