#pragma once

#include <array>
#include <span>
#include <vector>

#include "intent/autodiff/tape.hpp"

namespace intent::ad {

// Differentiable ops. Rank-2 inputs are treated as a batch of rows and every
// per-row op maps independently over rows; rank-1 inputs are a single row.

/// input[..., k] * weight[m, k]^T + bias[m] -> [..., m].
Var affine(Var input, Var weight, Var bias);

Var tanh(Var x);
Var sigmoid(Var x);
Var exp(Var x);
/// Natural log with the input clamped below at `floor`; the gradient is zero
/// where the clamp is active.
Var log(Var x, double floor = 1e-12);
/// log(1 + e^x), evaluated stably.
Var softplus(Var x);

/// Normalized exponentials over the last axis, with max subtraction.
Var softmax(Var x);

Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Elementwise product of equally shaped tensors.
Var mul(Var a, Var b);
Var scale(Var x, double factor);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator*(double f, Var x) { return scale(x, f); }
inline Var operator-(Var x) { return scale(x, -1.0); }

/// Concatenation along the last axis. Throws ShapeError on an empty list or
/// mismatched leading extents.
Var concat(std::span<const Var> parts);
inline Var concat(std::initializer_list<Var> parts) {
  return concat(std::span<const Var>(parts.begin(), parts.size()));
}

/// Columns [start, start + count) of the last axis.
Var slice(Var x, Index start, Index count);

/// Four equal contiguous chunks of the last axis, in order.
std::array<Var, 4> split4(Var x);

/// Cosine similarity per row. Each norm gets +eps before dividing.
Var cosine_similarity(Var u, Var v, double eps = 1e-12);

/// Rows of a rank-2 tensor, in the given order (repeats allowed).
Var gather_rows(Var x, std::span<const Index> rows);

/// Column j of the last axis; drops that axis.
Var column(Var x, Index j);

/// Multiplies each row of x[B, m] by s[B] (or x[m] by scalar s).
Var scale_rows(Var x, Var s);

/// Sum over the last axis; drops that axis.
Var row_sum(Var x);

Var sum(Var x);
Var mean(Var x);

}  // namespace intent::ad
