#include "fgan/optim.hpp"

#include <cmath>

namespace fgan::ad {

AdamState AdamState::for_param(const Tensor& param, float lr, float beta1,
                               float beta2, float eps) {
  AdamState s;
  s.m.assign(param.data.size(), 0.0f);
  s.v.assign(param.data.size(), 0.0f);
  s.lr = lr;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.eps = eps;
  return s;
}

void adam_step(Tensor& param, std::span<const float> grad, AdamState& state) {
  if (grad.size() != param.data.size() || state.m.size() != param.data.size()) {
    throw ShapeError("adam_step gradient/state size does not match parameter");
  }
  state.t += 1;
  const double c1 = 1.0 - std::pow(static_cast<double>(state.beta1), static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(static_cast<double>(state.beta2), static_cast<double>(state.t));
  for (std::size_t i = 0; i < param.data.size(); ++i) {
    const float g = grad[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0f - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0f - state.beta2) * g * g;
    const float mhat = static_cast<float>(state.m[i] / c1);
    const float vhat = static_cast<float>(state.v[i] / c2);
    param.data[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

}  // namespace fgan::ad
