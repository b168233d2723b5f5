#pragma once

#include <functional>

#include "fgan/tensor.hpp"

namespace fgan::ad {

struct GradCheckResult {
  double max_rel_err = 0.0;
  double median_rel_err = 0.0;
};

/// Compares backward() against central finite differences, elementwise over
/// `input`, for a scalar-valued function. Relative error denominator is
/// max(|analytic|, |numeric|, 1e-8). The numeric side uses only forward
/// evaluations, so it stays independent of the backward path it checks.
///
/// `fn` must be deterministic across calls (re-seed any internal randomness).
GradCheckResult grad_check(const std::function<Tensor(const Tensor&)>& fn,
                           const Tensor& input, float step = 1e-3f);

}  // namespace fgan::ad
