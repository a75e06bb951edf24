#pragma once

#include "lowbridge/tensor.hpp"

namespace lowbridge {

// Differentiable operations over NCHW tensors. Forward passes are pure and
// deterministic (fixed accumulation order); each op installs an analytic
// backward. None of them mutate their inputs.

// Cross-correlation. input [N,C,H,W], weight [F,C,kh,kw] with odd kh,kw,
// bias [F]. Zero padding. Output [N,F,H',W'] with
// H' = (H + 2*padding - kh)/stride + 1, which must be integral.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int stride = 1, int padding = 0);

// 2x2 max pooling, stride 2. H and W must be even. Gradient flows to the
// first maximum in row-major window order.
Tensor pool_max2x2(const Tensor& input);

// Nearest-neighbor 2x upsampling; backward sums each 2x2 block.
Tensor upsample_nearest2x(const Tensor& input);

// Per-(sample, channel) standardization followed by the affine gamma/beta.
// gamma, beta have extent [C].
Tensor instance_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                     float eps = 1e-5f);

Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, float slope);
Tensor sigmoid(const Tensor& x);

// Channel concatenation of [N,C1,H,W] and [N,C2,H,W] -> [N,C1+C2,H,W].
Tensor concat_channels(const Tensor& a, const Tensor& b);

// Elementwise sum of identically shaped tensors.
Tensor add(const Tensor& a, const Tensor& b);

// Multiplies every element by a constant.
Tensor scale(const Tensor& x, float factor);

// Per-pixel channel softmax over [N,n,H,W], stabilized by max subtraction.
Tensor softmax_channels(const Tensor& input);

} // namespace lowbridge
