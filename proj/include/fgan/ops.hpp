#pragma once

#include "fgan/rng.hpp"
#include "fgan/tensor.hpp"

namespace fgan::ad {

/// Cross-correlation over NCHW input with OIKK weight. Output extent
/// (H + 2*padding - k) / stride + 1 must be a positive integer.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int stride, int padding);

/// Adjoint of conv2d. Weight layout is IOKK (first axis = input channels of
/// this op), so a conv2d weight can be reused directly for the transposed
/// pass over conv2d's output. Output extent is (H-1)*stride - 2*padding + k.
Tensor conv_transpose2d(const Tensor& input, const Tensor& weight,
                        const Tensor& bias, int stride, int padding);

/// Per-(sample, channel) normalisation over the spatial extent:
/// y = (x - mean) / sqrt(var + eps) * gamma + beta. Requires H*W >= 2.
Tensor instance_norm(const Tensor& input, const Tensor& gamma,
                     const Tensor& beta, float eps = 1e-5f);

enum class Act { LeakyRelu, Relu, Tanh, Sigmoid };

/// Elementwise activation; LeakyRelu uses slope 0.2 on negatives.
Tensor activation(const Tensor& input, Act kind);

/// Stack b's channels after a's. Batch and spatial extents must match.
Tensor concat_channels(const Tensor& a, const Tensor& b);

/// Channels [c_begin, c_end) of an NCHW tensor.
Tensor slice_channels(const Tensor& input, int c_begin, int c_end);

/// Inverted dropout: each element zeroed with probability p and survivors
/// scaled by 1/(1-p) while training; identity at inference. 0 <= p < 1.
Tensor dropout(const Tensor& input, float p, bool training, Rng& rng);

/// Mean over elements of the numerically stable binary cross-entropy between
/// logits and a constant target in {0, 1}.
Tensor bce_with_logits(const Tensor& logits, float target);

/// Mean absolute difference.
Tensor l1_loss(const Tensor& a, const Tensor& b);

Tensor sum(const Tensor& input);
Tensor mean(const Tensor& input);
Tensor add(const Tensor& a, const Tensor& b);  // elementwise
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor scale(const Tensor& input, float factor);

}  // namespace fgan::ad
