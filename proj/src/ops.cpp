#include "fgan/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace fgan::ad {

namespace {

// ---------------------------------------------------------------------------
// Dense helpers. Convolutions go through im2col/col2im plus three tiny matmul
// kernels whose inner loops run over contiguous memory; that is fast enough
// for this model scale without pulling in a BLAS.
// ---------------------------------------------------------------------------

// col[(c*k+ky)*k+kx][oh*colW+ow] = src[c][oh*s-p+ky][ow*s-p+kx], 0 outside.
void im2col(const float* src, int C, int H, int W, int k, int stride, int pad,
            int colH, int colW, float* col) {
  const std::size_t spatial = static_cast<std::size_t>(colH) * colW;
  for (int c = 0; c < C; ++c) {
    const float* plane = src + static_cast<std::size_t>(c) * H * W;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        float* row = col + (static_cast<std::size_t>((c * k + ky) * k + kx)) * spatial;
        for (int oh = 0; oh < colH; ++oh) {
          const int y = oh * stride - pad + ky;
          float* out = row + static_cast<std::size_t>(oh) * colW;
          if (y < 0 || y >= H) {
            std::fill(out, out + colW, 0.0f);
            continue;
          }
          const float* srow = plane + static_cast<std::size_t>(y) * W;
          for (int ow = 0; ow < colW; ++ow) {
            const int x = ow * stride - pad + kx;
            out[ow] = (x >= 0 && x < W) ? srow[x] : 0.0f;
          }
        }
      }
    }
  }
}

// Scatter-add adjoint of im2col.
void col2im_add(const float* col, int C, int H, int W, int k, int stride,
                int pad, int colH, int colW, float* im) {
  const std::size_t spatial = static_cast<std::size_t>(colH) * colW;
  for (int c = 0; c < C; ++c) {
    float* plane = im + static_cast<std::size_t>(c) * H * W;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const float* row = col + (static_cast<std::size_t>((c * k + ky) * k + kx)) * spatial;
        for (int oh = 0; oh < colH; ++oh) {
          const int y = oh * stride - pad + ky;
          if (y < 0 || y >= H) continue;
          float* drow = plane + static_cast<std::size_t>(y) * W;
          const float* srow = row + static_cast<std::size_t>(oh) * colW;
          for (int ow = 0; ow < colW; ++ow) {
            const int x = ow * stride - pad + kx;
            if (x >= 0 && x < W) drow[x] += srow[ow];
          }
        }
      }
    }
  }
}

// C[M x N] += A[M x K] * B[K x N]
void matmul_acc(const float* A, const float* B, float* C, int M, int K, int N) {
  for (int m = 0; m < M; ++m) {
    float* crow = C + static_cast<std::size_t>(m) * N;
    const float* arow = A + static_cast<std::size_t>(m) * K;
    for (int k = 0; k < K; ++k) {
      const float a = arow[k];
      if (a == 0.0f) continue;
      const float* brow = B + static_cast<std::size_t>(k) * N;
      for (int n = 0; n < N; ++n) crow[n] += a * brow[n];
    }
  }
}

// C[M x N] += A^T * B with A[K x M], B[K x N]
void matmul_ta_acc(const float* A, const float* B, float* C, int K, int M, int N) {
  for (int k = 0; k < K; ++k) {
    const float* arow = A + static_cast<std::size_t>(k) * M;
    const float* brow = B + static_cast<std::size_t>(k) * N;
    for (int m = 0; m < M; ++m) {
      const float a = arow[m];
      if (a == 0.0f) continue;
      float* crow = C + static_cast<std::size_t>(m) * N;
      for (int n = 0; n < N; ++n) crow[n] += a * brow[n];
    }
  }
}

// C[M x N] += A * B^T with A[M x K], B[N x K]
void matmul_bt_acc(const float* A, const float* B, float* C, int M, int K, int N) {
  for (int m = 0; m < M; ++m) {
    const float* arow = A + static_cast<std::size_t>(m) * K;
    float* crow = C + static_cast<std::size_t>(m) * N;
    for (int n = 0; n < N; ++n) {
      const float* brow = B + static_cast<std::size_t>(n) * K;
      float s = 0.0f;
      for (int k = 0; k < K; ++k) s += arow[k] * brow[k];
      crow[n] += s;
    }
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw ShapeError(what);
}

struct ConvDims {
  int N, Cin, H, W, Cout, k, outH, outW;
};

int conv_out_extent(int in, int k, int stride, int pad) {
  const int num = in + 2 * pad - k;
  if (num < 0 || num % stride != 0) {
    throw ConfigError("convolution output extent (" + std::to_string(in) + " + 2*" +
                      std::to_string(pad) + " - " + std::to_string(k) + ") / " +
                      std::to_string(stride) + " + 1 is not a positive integer");
  }
  return num / stride + 1;
}

void check_conv_args(const Tensor& input, const Tensor& weight, const Tensor& bias,
                     int stride, int padding) {
  require(input.rank() == 4, "conv input must be NCHW");
  require(weight.rank() == 4, "conv weight must be rank 4");
  require(weight.shape[2] == weight.shape[3], "conv kernel must be square");
  require(bias.rank() == 1, "conv bias must be rank 1");
  if (stride < 1) throw ConfigError("conv stride must be >= 1");
  if (padding < 0) throw ConfigError("conv padding must be >= 0");
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int stride, int padding) {
  check_conv_args(input, weight, bias, stride, padding);
  ConvDims d;
  d.N = input.shape[0];
  d.Cin = input.shape[1];
  d.H = input.shape[2];
  d.W = input.shape[3];
  d.Cout = weight.shape[0];
  d.k = weight.shape[2];
  if (weight.shape[1] != d.Cin) {
    throw ShapeError("conv2d weight expects " + std::to_string(weight.shape[1]) +
                     " input channels, input has " + std::to_string(d.Cin));
  }
  require(bias.shape[0] == d.Cout, "conv2d bias size must equal output channels");
  d.outH = conv_out_extent(d.H, d.k, stride, padding);
  d.outW = conv_out_extent(d.W, d.k, stride, padding);

  const int ikk = d.Cin * d.k * d.k;
  const std::size_t out_spatial = static_cast<std::size_t>(d.outH) * d.outW;
  const std::size_t in_plane = static_cast<std::size_t>(d.Cin) * d.H * d.W;

  Tensor out({d.N, d.Cout, d.outH, d.outW});
  std::vector<float> cols(static_cast<std::size_t>(d.N) * ikk * out_spatial);
  for (int n = 0; n < d.N; ++n) {
    float* col = cols.data() + static_cast<std::size_t>(n) * ikk * out_spatial;
    im2col(input.data.data() + n * in_plane, d.Cin, d.H, d.W, d.k, stride, padding,
           d.outH, d.outW, col);
    float* dst = out.data.data() + static_cast<std::size_t>(n) * d.Cout * out_spatial;
    matmul_acc(weight.data.data(), col, dst, d.Cout, ikk, static_cast<int>(out_spatial));
    for (int o = 0; o < d.Cout; ++o) {
      const float b = bias.data[o];
      float* row = dst + static_cast<std::size_t>(o) * out_spatial;
      for (std::size_t i = 0; i < out_spatial; ++i) row[i] += b;
    }
  }

  Tape* tape = Tape::active();
  const int xn = input_node(tape, input);
  const int wn = input_node(tape, weight);
  const int bn = input_node(tape, bias);
  if (tape && (xn >= 0 || wn >= 0 || bn >= 0)) {
    const int s = stride, p = padding;
    out.tape_id = tape->id();
    out.node = tape->record(
        out.numel(),
        [d, s, p, ikk, out_spatial, in_plane, xn, wn, bn, cols = std::move(cols),
         w = weight.data](Tape& t, const std::vector<float>& gout) {
          for (int n = 0; n < d.N; ++n) {
            const float* go = gout.data() + static_cast<std::size_t>(n) * d.Cout * out_spatial;
            const float* col = cols.data() + static_cast<std::size_t>(n) * ikk * out_spatial;
            if (wn >= 0) {
              matmul_bt_acc(go, col, t.grad_buffer(wn).data(), d.Cout,
                            static_cast<int>(out_spatial), ikk);
            }
            if (bn >= 0) {
              auto& gb = t.grad_buffer(bn);
              for (int o = 0; o < d.Cout; ++o) {
                const float* row = go + static_cast<std::size_t>(o) * out_spatial;
                float sum = 0.0f;
                for (std::size_t i = 0; i < out_spatial; ++i) sum += row[i];
                gb[o] += sum;
              }
            }
            if (xn >= 0) {
              std::vector<float> dcol(static_cast<std::size_t>(ikk) * out_spatial, 0.0f);
              matmul_ta_acc(w.data(), go, dcol.data(), d.Cout, ikk,
                            static_cast<int>(out_spatial));
              col2im_add(dcol.data(), d.Cin, d.H, d.W, d.k, s, p, d.outH, d.outW,
                         t.grad_buffer(xn).data() + n * in_plane);
            }
          }
        });
  }
  return out;
}

Tensor conv_transpose2d(const Tensor& input, const Tensor& weight,
                        const Tensor& bias, int stride, int padding) {
  check_conv_args(input, weight, bias, stride, padding);
  const int N = input.shape[0];
  const int Cin = input.shape[1];
  const int H = input.shape[2];
  const int W = input.shape[3];
  if (weight.shape[0] != Cin) {
    throw ShapeError("conv_transpose2d weight expects " + std::to_string(weight.shape[0]) +
                     " input channels, input has " + std::to_string(Cin));
  }
  const int Cout = weight.shape[1];
  const int k = weight.shape[2];
  require(bias.shape[0] == Cout, "conv_transpose2d bias size must equal output channels");
  const int outH = (H - 1) * stride - 2 * padding + k;
  const int outW = (W - 1) * stride - 2 * padding + k;
  if (outH < 1 || outW < 1) {
    throw ConfigError("conv_transpose2d output extent would be < 1");
  }

  const int okk = Cout * k * k;
  const std::size_t in_spatial = static_cast<std::size_t>(H) * W;
  const std::size_t in_plane = static_cast<std::size_t>(Cin) * in_spatial;
  const std::size_t out_plane = static_cast<std::size_t>(Cout) * outH * outW;

  Tensor out({N, Cout, outH, outW});
  std::vector<float> tmp(static_cast<std::size_t>(okk) * in_spatial);
  for (int n = 0; n < N; ++n) {
    std::fill(tmp.begin(), tmp.end(), 0.0f);
    // tmp[o,ky,kx][h,w] = sum_i w[i][o,ky,kx] * x[i][h,w]
    matmul_ta_acc(weight.data.data(), input.data.data() + n * in_plane, tmp.data(),
                  Cin, okk, static_cast<int>(in_spatial));
    float* dst = out.data.data() + n * out_plane;
    col2im_add(tmp.data(), Cout, outH, outW, k, stride, padding, H, W, dst);
    for (int o = 0; o < Cout; ++o) {
      const float b = bias.data[o];
      float* row = dst + static_cast<std::size_t>(o) * outH * outW;
      for (int i = 0; i < outH * outW; ++i) row[i] += b;
    }
  }

  Tape* tape = Tape::active();
  const int xn = input_node(tape, input);
  const int wn = input_node(tape, weight);
  const int bn = input_node(tape, bias);
  if (tape && (xn >= 0 || wn >= 0 || bn >= 0)) {
    const int s = stride, p = padding;
    out.tape_id = tape->id();
    out.node = tape->record(
        out.numel(),
        [N, Cin, Cout, H, W, outH, outW, k, s, p, okk, in_spatial, in_plane, out_plane,
         xn, wn, bn, x = input.data, w = weight.data](Tape& t, const std::vector<float>& gout) {
          std::vector<float> colg(static_cast<std::size_t>(okk) * in_spatial);
          for (int n = 0; n < N; ++n) {
            const float* go = gout.data() + n * out_plane;
            // colg[o,ky,kx][h,w] = gout[o][h*s-p+ky][w*s-p+kx]
            im2col(go, Cout, outH, outW, k, s, p, H, W, colg.data());
            if (xn >= 0) {
              matmul_acc(w.data(), colg.data(), t.grad_buffer(xn).data() + n * in_plane,
                         Cin, okk, static_cast<int>(in_spatial));
            }
            if (wn >= 0) {
              matmul_bt_acc(x.data() + n * in_plane, colg.data(), t.grad_buffer(wn).data(),
                            Cin, static_cast<int>(in_spatial), okk);
            }
            if (bn >= 0) {
              auto& gb = t.grad_buffer(bn);
              for (int o = 0; o < Cout; ++o) {
                const float* row = go + static_cast<std::size_t>(o) * outH * outW;
                float sum = 0.0f;
                for (int i = 0; i < outH * outW; ++i) sum += row[i];
                gb[o] += sum;
              }
            }
          }
        });
  }
  return out;
}

Tensor instance_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                     float eps) {
  require(input.rank() == 4, "instance_norm input must be NCHW");
  const int N = input.shape[0], C = input.shape[1], H = input.shape[2], W = input.shape[3];
  require(gamma.rank() == 1 && gamma.shape[0] == C, "instance_norm gamma must have C entries");
  require(beta.rank() == 1 && beta.shape[0] == C, "instance_norm beta must have C entries");
  const std::int64_t M = static_cast<std::int64_t>(H) * W;
  if (M < 2) {
    throw StatError("instance_norm needs H*W >= 2, got " + std::to_string(H) + "x" +
                    std::to_string(W));
  }

  Tensor out(input.shape);
  std::vector<float> xhat(input.data.size());
  std::vector<float> inv_std(static_cast<std::size_t>(N) * C);
  for (int n = 0; n < N; ++n) {
    for (int c = 0; c < C; ++c) {
      const std::size_t base = (static_cast<std::size_t>(n) * C + c) * M;
      const float* src = input.data.data() + base;
      double sum = 0.0, sumsq = 0.0;
      for (std::int64_t i = 0; i < M; ++i) {
        sum += src[i];
        sumsq += static_cast<double>(src[i]) * src[i];
      }
      const double mean = sum / static_cast<double>(M);
      const double var = std::max(0.0, sumsq / static_cast<double>(M) - mean * mean);
      const float inv = static_cast<float>(1.0 / std::sqrt(var + eps));
      inv_std[static_cast<std::size_t>(n) * C + c] = inv;
      const float g = gamma.data[c], b = beta.data[c];
      float* xh = xhat.data() + base;
      float* dst = out.data.data() + base;
      for (std::int64_t i = 0; i < M; ++i) {
        xh[i] = (src[i] - static_cast<float>(mean)) * inv;
        dst[i] = xh[i] * g + b;
      }
    }
  }

  Tape* tape = Tape::active();
  const int xn = input_node(tape, input);
  const int gn = input_node(tape, gamma);
  const int bn = input_node(tape, beta);
  if (tape && (xn >= 0 || gn >= 0 || bn >= 0)) {
    out.tape_id = tape->id();
    out.node = tape->record(
        out.numel(),
        [N, C, M, xn, gn, bn, xhat = std::move(xhat), inv_std = std::move(inv_std),
         g = gamma.data](Tape& t, const std::vector<float>& gout) {
          for (int n = 0; n < N; ++n) {
            for (int c = 0; c < C; ++c) {
              const std::size_t base = (static_cast<std::size_t>(n) * C + c) * M;
              const float* go = gout.data() + base;
              const float* xh = xhat.data() + base;
              double s1 = 0.0, s2 = 0.0;
              for (std::int64_t i = 0; i < M; ++i) {
                s1 += go[i];
                s2 += static_cast<double>(go[i]) * xh[i];
              }
              if (gn >= 0) t.grad_buffer(gn)[c] += static_cast<float>(s2);
              if (bn >= 0) t.grad_buffer(bn)[c] += static_cast<float>(s1);
              if (xn >= 0) {
                const float inv = inv_std[static_cast<std::size_t>(n) * C + c];
                const float gm = g[c] * inv;
                const float m1 = static_cast<float>(s1 / static_cast<double>(M));
                const float m2 = static_cast<float>(s2 / static_cast<double>(M));
                float* dx = t.grad_buffer(xn).data() + base;
                for (std::int64_t i = 0; i < M; ++i) {
                  dx[i] += gm * (go[i] - m1 - xh[i] * m2);
                }
              }
            }
          }
        });
  }
  return out;
}

Tensor activation(const Tensor& input, Act kind) {
  Tensor out(input.shape);
  const std::size_t n = input.data.size();
  switch (kind) {
    case Act::LeakyRelu:
      for (std::size_t i = 0; i < n; ++i) {
        const float x = input.data[i];
        out.data[i] = x >= 0.0f ? x : 0.2f * x;
      }
      break;
    case Act::Relu:
      for (std::size_t i = 0; i < n; ++i) out.data[i] = std::max(0.0f, input.data[i]);
      break;
    case Act::Tanh:
      for (std::size_t i = 0; i < n; ++i) out.data[i] = std::tanh(input.data[i]);
      break;
    case Act::Sigmoid:
      for (std::size_t i = 0; i < n; ++i) {
        const float x = input.data[i];
        out.data[i] = x >= 0.0f ? 1.0f / (1.0f + std::exp(-x))
                                : std::exp(x) / (1.0f + std::exp(x));
      }
      break;
  }

  Tape* tape = Tape::active();
  const int xn = input_node(tape, input);
  if (tape && xn >= 0) {
    out.tape_id = tape->id();
    // Relu family differentiates off the input sign; tanh/sigmoid off the output.
    std::vector<float> saved =
        (kind == Act::LeakyRelu || kind == Act::Relu) ? input.data : out.data;
    out.node = tape->record(
        out.numel(),
        [kind, xn, saved = std::move(saved)](Tape& t, const std::vector<float>& gout) {
          auto& dx = t.grad_buffer(xn);
          switch (kind) {
            case Act::LeakyRelu:
              for (std::size_t i = 0; i < gout.size(); ++i) {
                dx[i] += gout[i] * (saved[i] >= 0.0f ? 1.0f : 0.2f);
              }
              break;
            case Act::Relu:
              for (std::size_t i = 0; i < gout.size(); ++i) {
                dx[i] += gout[i] * (saved[i] > 0.0f ? 1.0f : 0.0f);
              }
              break;
            case Act::Tanh:
              for (std::size_t i = 0; i < gout.size(); ++i) {
                dx[i] += gout[i] * (1.0f - saved[i] * saved[i]);
              }
              break;
            case Act::Sigmoid:
              for (std::size_t i = 0; i < gout.size(); ++i) {
                dx[i] += gout[i] * saved[i] * (1.0f - saved[i]);
              }
              break;
          }
        });
  }
  return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  require(a.rank() == 4 && b.rank() == 4, "concat_channels expects NCHW tensors");
  if (a.shape[0] != b.shape[0] || a.shape[2] != b.shape[2] || a.shape[3] != b.shape[3]) {
    throw ShapeError("concat_channels batch/spatial mismatch: " + a.shape_str() + " vs " +
                     b.shape_str());
  }
  const int N = a.shape[0], Ca = a.shape[1], Cb = b.shape[1];
  const std::size_t spatial = static_cast<std::size_t>(a.shape[2]) * a.shape[3];
  Tensor out({N, Ca + Cb, a.shape[2], a.shape[3]});
  for (int n = 0; n < N; ++n) {
    float* dst = out.data.data() + static_cast<std::size_t>(n) * (Ca + Cb) * spatial;
    std::copy_n(a.data.data() + static_cast<std::size_t>(n) * Ca * spatial, Ca * spatial, dst);
    std::copy_n(b.data.data() + static_cast<std::size_t>(n) * Cb * spatial, Cb * spatial,
                dst + static_cast<std::size_t>(Ca) * spatial);
  }

  Tape* tape = Tape::active();
  const int an = input_node(tape, a);
  const int bn = input_node(tape, b);
  if (tape && (an >= 0 || bn >= 0)) {
    out.tape_id = tape->id();
    out.node = tape->record(
        out.numel(),
        [N, Ca, Cb, spatial, an, bn](Tape& t, const std::vector<float>& gout) {
          for (int n = 0; n < N; ++n) {
            const float* go = gout.data() + static_cast<std::size_t>(n) * (Ca + Cb) * spatial;
            if (an >= 0) {
              float* da = t.grad_buffer(an).data() + static_cast<std::size_t>(n) * Ca * spatial;
              for (std::size_t i = 0; i < Ca * spatial; ++i) da[i] += go[i];
            }
            if (bn >= 0) {
              const float* gb = go + static_cast<std::size_t>(Ca) * spatial;
              float* db = t.grad_buffer(bn).data() + static_cast<std::size_t>(n) * Cb * spatial;
              for (std::size_t i = 0; i < Cb * spatial; ++i) db[i] += gb[i];
            }
          }
        });
  }
  return out;
}

Tensor slice_channels(const Tensor& input, int c_begin, int c_end) {
  require(input.rank() == 4, "slice_channels expects an NCHW tensor");
  const int N = input.shape[0], C = input.shape[1];
  if (c_begin < 0 || c_end > C || c_begin >= c_end) {
    throw ShapeError("slice_channels range [" + std::to_string(c_begin) + ", " +
                     std::to_string(c_end) + ") invalid for " + std::to_string(C) +
                     " channels");
  }
  const int Cs = c_end - c_begin;
  const std::size_t spatial = static_cast<std::size_t>(input.shape[2]) * input.shape[3];
  Tensor out({N, Cs, input.shape[2], input.shape[3]});
  for (int n = 0; n < N; ++n) {
    const float* src =
        input.data.data() + (static_cast<std::size_t>(n) * C + c_begin) * spatial;
    std::copy_n(src, Cs * spatial,
                out.data.data() + static_cast<std::size_t>(n) * Cs * spatial);
  }

  Tape* tape = Tape::active();
  const int xn = input_node(tape, input);
  if (tape && xn >= 0) {
    out.tape_id = tape->id();
    out.node = tape->record(
        out.numel(),
        [N, C, Cs, c_begin, spatial, xn](Tape& t, const std::vector<float>& gout) {
          for (int n = 0; n < N; ++n) {
            float* dx =
                t.grad_buffer(xn).data() + (static_cast<std::size_t>(n) * C + c_begin) * spatial;
            const float* go = gout.data() + static_cast<std::size_t>(n) * Cs * spatial;
            for (std::size_t i = 0; i < Cs * spatial; ++i) dx[i] += go[i];
          }
        });
  }
  return out;
}

Tensor dropout(const Tensor& input, float p, bool training, Rng& rng) {
  if (p < 0.0f || p >= 1.0f) {
    throw ConfigError("dropout probability must be in [0, 1), got " + std::to_string(p));
  }
  Tape* tape = Tape::active();
  const int xn = input_node(tape, input);

  if (!training || p == 0.0f) {
    Tensor out = input.detached();
    if (tape && xn >= 0) {
      out.tape_id = tape->id();
      out.node = tape->record(out.numel(),
                              [xn](Tape& t, const std::vector<float>& gout) {
                                t.add_grad(xn, gout);
                              });
    }
    return out;
  }

  const float keep_scale = 1.0f / (1.0f - p);
  std::vector<float> mask(input.data.size());
  Tensor out(input.shape);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = rng.next_unit() < p ? 0.0f : keep_scale;
    out.data[i] = input.data[i] * mask[i];
  }
  if (tape && xn >= 0) {
    out.tape_id = tape->id();
    out.node = tape->record(
        out.numel(), [xn, mask = std::move(mask)](Tape& t, const std::vector<float>& gout) {
          auto& dx = t.grad_buffer(xn);
          for (std::size_t i = 0; i < gout.size(); ++i) dx[i] += gout[i] * mask[i];
        });
  }
  return out;
}

Tensor bce_with_logits(const Tensor& logits, float target) {
  const std::size_t n = logits.data.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = logits.data[i];
    // max(z,0) - z*t + log(1 + exp(-|z|)); stable through |z| ~ 1e4 and beyond.
    acc += std::max(z, 0.0) - z * target + std::log1p(std::exp(-std::abs(z)));
  }
  Tensor out = Tensor::scalar(static_cast<float>(acc / static_cast<double>(n)));

  Tape* tape = Tape::active();
  const int zn = input_node(tape, logits);
  if (tape && zn >= 0) {
    out.tape_id = tape->id();
    out.node = tape->record(
        1, [zn, target, z = logits.data](Tape& t, const std::vector<float>& gout) {
          const float g0 = gout[0] / static_cast<float>(z.size());
          auto& dz = t.grad_buffer(zn);
          for (std::size_t i = 0; i < z.size(); ++i) {
            const float x = z[i];
            const float sig = x >= 0.0f ? 1.0f / (1.0f + std::exp(-x))
                                        : std::exp(x) / (1.0f + std::exp(x));
            dz[i] += g0 * (sig - target);
          }
        });
  }
  return out;
}

Tensor l1_loss(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("l1_loss shape mismatch: " + a.shape_str() + " vs " + b.shape_str());
  }
  const std::size_t n = a.data.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::abs(static_cast<double>(a.data[i]) - b.data[i]);
  Tensor out = Tensor::scalar(static_cast<float>(acc / static_cast<double>(n)));

  Tape* tape = Tape::active();
  const int an = input_node(tape, a);
  const int bn = input_node(tape, b);
  if (tape && (an >= 0 || bn >= 0)) {
    out.tape_id = tape->id();
    out.node = tape->record(
        1, [an, bn, av = a.data, bv = b.data](Tape& t, const std::vector<float>& gout) {
          const float g0 = gout[0] / static_cast<float>(av.size());
          for (std::size_t i = 0; i < av.size(); ++i) {
            const float d = av[i] - bv[i];
            const float s = d > 0.0f ? 1.0f : (d < 0.0f ? -1.0f : 0.0f);
            if (an >= 0) t.grad_buffer(an)[i] += g0 * s;
            if (bn >= 0) t.grad_buffer(bn)[i] -= g0 * s;
          }
        });
  }
  return out;
}

Tensor sum(const Tensor& input) {
  double acc = 0.0;
  for (float v : input.data) acc += v;
  Tensor out = Tensor::scalar(static_cast<float>(acc));
  Tape* tape = Tape::active();
  const int xn = input_node(tape, input);
  if (tape && xn >= 0) {
    const std::size_t n = input.data.size();
    out.tape_id = tape->id();
    out.node = tape->record(1, [xn, n](Tape& t, const std::vector<float>& gout) {
      auto& dx = t.grad_buffer(xn);
      for (std::size_t i = 0; i < n; ++i) dx[i] += gout[0];
    });
  }
  return out;
}

Tensor mean(const Tensor& input) {
  double acc = 0.0;
  for (float v : input.data) acc += v;
  Tensor out = Tensor::scalar(static_cast<float>(acc / static_cast<double>(input.data.size())));
  Tape* tape = Tape::active();
  const int xn = input_node(tape, input);
  if (tape && xn >= 0) {
    const std::size_t n = input.data.size();
    out.tape_id = tape->id();
    out.node = tape->record(1, [xn, n](Tape& t, const std::vector<float>& gout) {
      const float g0 = gout[0] / static_cast<float>(n);
      auto& dx = t.grad_buffer(xn);
      for (std::size_t i = 0; i < n; ++i) dx[i] += g0;
    });
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("add shape mismatch: " + a.shape_str() + " vs " + b.shape_str());
  }
  Tensor out(a.shape);
  for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] + b.data[i];
  Tape* tape = Tape::active();
  const int an = input_node(tape, a);
  const int bn = input_node(tape, b);
  if (tape && (an >= 0 || bn >= 0)) {
    out.tape_id = tape->id();
    out.node = tape->record(out.numel(),
                            [an, bn](Tape& t, const std::vector<float>& gout) {
                              if (an >= 0) t.add_grad(an, gout);
                              if (bn >= 0) t.add_grad(bn, gout);
                            });
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("mul shape mismatch: " + a.shape_str() + " vs " + b.shape_str());
  }
  Tensor out(a.shape);
  for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] * b.data[i];
  Tape* tape = Tape::active();
  const int an = input_node(tape, a);
  const int bn = input_node(tape, b);
  if (tape && (an >= 0 || bn >= 0)) {
    out.tape_id = tape->id();
    out.node = tape->record(
        out.numel(),
        [an, bn, av = a.data, bv = b.data](Tape& t, const std::vector<float>& gout) {
          for (std::size_t i = 0; i < gout.size(); ++i) {
            if (an >= 0) t.grad_buffer(an)[i] += gout[i] * bv[i];
            if (bn >= 0) t.grad_buffer(bn)[i] += gout[i] * av[i];
          }
        });
  }
  return out;
}

Tensor scale(const Tensor& input, float factor) {
  Tensor out(input.shape);
  for (std::size_t i = 0; i < input.data.size(); ++i) out.data[i] = input.data[i] * factor;
  Tape* tape = Tape::active();
  const int xn = input_node(tape, input);
  if (tape && xn >= 0) {
    out.tape_id = tape->id();
    out.node = tape->record(out.numel(),
                            [xn, factor](Tape& t, const std::vector<float>& gout) {
                              auto& dx = t.grad_buffer(xn);
                              for (std::size_t i = 0; i < gout.size(); ++i) {
                                dx[i] += gout[i] * factor;
                              }
                            });
  }
  return out;
}

}  // namespace fgan::ad
