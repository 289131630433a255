#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mirlab/numerics/tensor.h"

namespace mirlab::numerics {

// a[m x k] * b[k x n].
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor relu(const Tensor& a);
// x[rows x f] + bias[f] broadcast over rows (any leading shape whose last
// dimension is f).
Tensor add_bias(const Tensor& x, const Tensor& bias);
// x * w + bias with x[rows x in], w[in x out], bias[out].
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias);

// Joins tensors along `axis`; all other dimensions must agree.
Tensor concat(std::span<const Tensor> parts, std::size_t axis);
Tensor concat(std::initializer_list<Tensor> parts, std::size_t axis);
Tensor reshape(const Tensor& a, Shape shape);
// Picks rows of a 2-D tensor (rows may repeat).
Tensor gather_rows(const Tensor& a, std::span<const std::size_t> rows);
Tensor sum(const Tensor& a);

// 3x3 cross-correlation with bias and one pixel of zero padding. Accepts
// [C x H x W] or batched [N x C x H x W] input; kernel is [O x C x 3 x 3].
// Output spatial size is H for stride 1 and floor((H + 1) / 2) for stride 2.
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, int stride);

// Sum over rows of the cross-entropy between target rows and
// softmax(logits) rows: -sum_ik targets[i,k] * log softmax(logits[i,:])[k].
// Target rows must be non-negative and sum to 1 within 1e-9.
Tensor softmax_xent_soft(const Tensor& logits, const Tensor& targets);
// Row-wise softmax of a 2-D tensor, row-max stabilised (no gradient).
std::vector<double> softmax_rows(const Tensor& logits);

// Sum of squared differences (not the mean).
Tensor mse(const Tensor& pred, const Tensor& target);

}  // namespace mirlab::numerics
