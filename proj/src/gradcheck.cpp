#include "fgan/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fgan::ad {

GradCheckResult grad_check(const std::function<Tensor(const Tensor&)>& fn,
                           const Tensor& input, float step) {
  std::vector<float> analytic;
  {
    Tape tape;
    Tensor x = input.detached();
    x.requires_grad = true;
    // Pin the leaf before fn runs: copies of x made inside fn then share its
    // node id, so every use accumulates into the same gradient buffer.
    tape.watch(x);
    Tensor y = fn(x);
    if (y.numel() != 1) {
      throw ContractError("grad_check function must be scalar-valued");
    }
    tape.backward(y);
    auto g = tape.grad(x);
    analytic.assign(g.begin(), g.end());
  }

  Tensor probe = input.detached();
  std::vector<double> errs(analytic.size());
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const float orig = probe.data[i];
    const float hi = orig + step;
    const float lo = orig - step;
    probe.data[i] = hi;
    const double f_hi = fn(probe).item();
    probe.data[i] = lo;
    const double f_lo = fn(probe).item();
    probe.data[i] = orig;
    // Divide by the realised spacing so float32 rounding of orig +- step does
    // not masquerade as gradient error.
    const double numeric = (f_hi - f_lo) / (static_cast<double>(hi) - lo);
    const double a = analytic[i];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    errs[i] = std::abs(a - numeric) / denom;
  }

  GradCheckResult r;
  for (double e : errs) r.max_rel_err = std::max(r.max_rel_err, e);
  std::nth_element(errs.begin(), errs.begin() + errs.size() / 2, errs.end());
  r.median_rel_err = errs[errs.size() / 2];
  return r;
}

}  // namespace fgan::ad
