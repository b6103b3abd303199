#pragma once

// Differentiable operations on Tensor. Shapes are checked eagerly and every
// mismatch raises InvalidInput. Unless noted, binary elementwise ops require
// identical shapes (no implicit broadcasting).

#include <cstddef>
#include <span>

#include "sfd/tensor.hpp"

namespace sfd::ops {

// Elementwise arithmetic.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double value);

// Elementwise nonlinearities.
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor abs(const Tensor& a);
Tensor square(const Tensor& a);
/// sqrt with a zero subgradient at 0 so distances between identical points stay finite.
Tensor sqrt(const Tensor& a);
Tensor reciprocal(const Tensor& a);
/// max(a, floor); gradient is zero where the floor is active.
Tensor clamp_min(const Tensor& a, double floor);

// Reductions.
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// [N, M] -> [N]
Tensor sum_rows(const Tensor& a);

// Matrix ops on rank-2 tensors.
/// [N, K] x [K, M] -> [N, M]
Tensor matmul(const Tensor& a, const Tensor& b);
/// [N, M] + [M] (bias broadcast over rows)
Tensor add_bias(const Tensor& x, const Tensor& bias);
/// [N, M] * [N] (one factor per row)
Tensor scale_rows(const Tensor& x, const Tensor& factors);
/// [N, A] ++ [N, B] -> [N, A+B]
Tensor concat_cols(const Tensor& a, const Tensor& b);
/// Columns [begin, end) of a rank-2 tensor.
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
/// Rows picked (with repetition allowed) from a rank-2 tensor.
Tensor gather_rows(const Tensor& a, std::span<const std::size_t> rows);
/// Row-wise unit L2 norm; eps guards the zero vector.
Tensor l2_normalize_rows(const Tensor& a, double eps = 1e-12);

/// Same values, new shape (element count must agree).
Tensor reshape(const Tensor& a, Shape shape);

// Feature-map ops on NCHW tensors.
/// x [B, C, H, W], weight [O, C, k, k], bias [O] -> [B, O, H', W'].
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t stride,
              std::size_t padding);
/// [B, C, H, W] -> [B, C]
Tensor global_avg_pool(const Tensor& x);
/// Per-channel projection onto a fixed spatial basis: out[b,c] = sum_hw x[b,c,h,w] * basis[c,h,w].
/// The basis is treated as a constant.
Tensor channel_project(const Tensor& x, const Tensor& basis);
/// x [B, C, H, W] * gate [B, C] broadcast over H, W.
Tensor scale_channels(const Tensor& x, const Tensor& gate);

}  // namespace sfd::ops
