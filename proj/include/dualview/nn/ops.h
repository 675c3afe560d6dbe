#pragma once

#include "dualview/nn/tape.h"

#include <cstddef>
#include <vector>

// Differentiable operations recorded on a Tape. Every op validates shapes and
// throws DimensionError naming both operands on mismatch.
namespace dualview::nn::ops {

// y = x * W^T + b^T, with W (out x in) and b (out x 1).
template <typename T>
Var<T> linear(Var<T> x, Var<T> weight, Var<T> bias);

template <typename T>
Var<T> add(Var<T> a, Var<T> b);

template <typename T>
Var<T> sub(Var<T> a, Var<T> b);

template <typename T>
Var<T> hadamard(Var<T> a, Var<T> b);

template <typename T>
Var<T> scale(Var<T> a, T factor);

template <typename T>
Var<T> relu(Var<T> x);

template <typename T>
Var<T> sigmoid(Var<T> x);

// Row-wise standardization followed by the affine map; gain and shift are
// (cols x 1).
template <typename T>
Var<T> layer_norm(Var<T> x, Var<T> gain, Var<T> shift, T eps);

// Softmax(Q K^T / sqrt(head_dim)) evaluated independently for each block of
// `seq_len` consecutive rows and for each head. Q and K are
// (blocks*seq_len x heads*head_dim). The result stacks one (seq_len x seq_len)
// matrix per (block, head) pair, block-major: row (b*heads + h)*seq_len + i.
template <typename T>
Var<T> attention_probs(Var<T> q, Var<T> k, std::size_t heads, std::size_t seq_len);

// Applies attention probabilities produced by attention_probs to V, yielding
// the concatenated per-head outputs (blocks*seq_len x heads*head_dim).
template <typename T>
Var<T> attention_mix(Var<T> probs, Var<T> v, std::size_t heads, std::size_t seq_len);

// Mean over heads of probs[row=from, col=to] for every block -> (blocks x 1).
template <typename T>
Var<T> attention_head_mean(Var<T> probs, std::size_t heads, std::size_t seq_len, std::size_t from,
                           std::size_t to);

// Rows start, start+stride, ... (count rows).
template <typename T>
Var<T> strided_rows(Var<T> x, std::size_t start, std::size_t stride, std::size_t count);

template <typename T>
Var<T> slice_rows(Var<T> x, std::size_t start, std::size_t count);

template <typename T>
Var<T> concat_cols(const std::vector<Var<T>>& parts);

template <typename T>
Var<T> concat_rows(const std::vector<Var<T>>& parts);

// Tiles a single row n times.
template <typename T>
Var<T> repeat_rows(Var<T> row, std::size_t n);

// w*l + (1-w)*g elementwise on column vectors, clamped into [min(l,g), max(l,g)]
// to absorb rounding; the clamp is inactive in exact arithmetic.
template <typename T>
Var<T> convex_fusion(Var<T> w, Var<T> l, Var<T> g);

// Scalar node whose value and gradient with respect to `x` were computed by the
// caller (closed-form losses over short score vectors).
template <typename T>
Var<T> scalar_function(Var<T> x, T value, Matrix<T> dvalue_dx);

}  // namespace dualview::nn::ops
