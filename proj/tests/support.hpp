#pragma once

// Shared test utilities. The oracles here are deliberately independent of the
// library's computation paths: convolution is re-derived with plain nested
// loops, gradients with forward-only central differences.

#include <cmath>
#include <functional>
#include <vector>

#include "fgan/rng.hpp"
#include "fgan/tensor.hpp"

namespace testsup {

inline fgan::ad::Tensor rand_tensor(std::vector<int> shape, fgan::Rng& rng,
                                    float lo = -1.0f, float hi = 1.0f) {
  fgan::ad::Tensor t(std::move(shape));
  for (auto& v : t.data) v = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

// Push values away from activation kinks so finite differences stay clean.
inline void avoid_kinks(fgan::ad::Tensor& t, float margin = 0.05f) {
  for (auto& v : t.data) {
    if (std::abs(v) < margin) v += (v >= 0.0f ? margin : -margin);
  }
}

// Quadruple-loop cross-correlation, the conv2d oracle.
inline std::vector<float> naive_conv2d(const std::vector<float>& x, int N, int Cin,
                                       int H, int W, const std::vector<float>& w,
                                       int Cout, int k, const std::vector<float>& bias,
                                       int stride, int pad, int outH, int outW) {
  std::vector<float> out(static_cast<std::size_t>(N) * Cout * outH * outW, 0.0f);
  for (int n = 0; n < N; ++n) {
    for (int o = 0; o < Cout; ++o) {
      for (int oh = 0; oh < outH; ++oh) {
        for (int ow = 0; ow < outW; ++ow) {
          double acc = bias.empty() ? 0.0 : bias[o];
          for (int c = 0; c < Cin; ++c) {
            for (int ky = 0; ky < k; ++ky) {
              for (int kx = 0; kx < k; ++kx) {
                const int y = oh * stride - pad + ky;
                const int xx = ow * stride - pad + kx;
                if (y < 0 || y >= H || xx < 0 || xx >= W) continue;
                acc += static_cast<double>(x[((static_cast<std::size_t>(n) * Cin + c) * H + y) * W + xx]) *
                       w[((static_cast<std::size_t>(o) * Cin + c) * k + ky) * k + kx];
              }
            }
          }
          out[((static_cast<std::size_t>(n) * Cout + o) * outH + oh) * outW + ow] =
              static_cast<float>(acc);
        }
      }
    }
  }
  return out;
}

// Forward-only central differences; independent of Tape::backward.
inline std::vector<double> fd_gradient(
    const std::function<fgan::ad::Tensor(const fgan::ad::Tensor&)>& fn,
    const fgan::ad::Tensor& input, float h = 1e-3f) {
  fgan::ad::Tensor probe = input.detached();
  std::vector<double> g(probe.data.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const float orig = probe.data[i];
    const float hi = orig + h;
    const float lo = orig - h;
    probe.data[i] = hi;
    const double f_hi = fn(probe).item();
    probe.data[i] = lo;
    const double f_lo = fn(probe).item();
    probe.data[i] = orig;
    g[i] = (f_hi - f_lo) / (static_cast<double>(hi) - lo);
  }
  return g;
}

inline double dot(const std::vector<float>& a, const std::vector<float>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

}  // namespace testsup
