#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fgan/tensor.hpp"

namespace fgan::ad {

/// Per-parameter Adam accumulator state.
struct AdamState {
  std::vector<float> m;  // first moment, parameter-shaped
  std::vector<float> v;  // second moment
  std::int64_t t = 0;    // completed steps
  float lr = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;

  static AdamState for_param(const Tensor& param, float lr, float beta1 = 0.9f,
                             float beta2 = 0.999f, float eps = 1e-8f);
};

/// One Adam update with bias correction; increments state.t.
void adam_step(Tensor& param, std::span<const float> grad, AdamState& state);

}  // namespace fgan::ad
