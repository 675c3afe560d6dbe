#include "dualview/nn/ops.h"

#include "dualview/errors.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace dualview::nn::ops {
namespace {

template <typename T>
void require_same_shape(const char* op, Var<T> a, Var<T> b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.value()) + " vs " +
                         shape_string(b.value()));
  }
}

template <typename T>
void require_blocks(const char* op, Var<T> x, std::size_t heads, std::size_t seq_len) {
  if (heads == 0 || seq_len == 0) {
    throw DimensionError(std::string(op) + ": heads and seq_len must be positive");
  }
  if (x.rows() % static_cast<Eigen::Index>(seq_len) != 0) {
    throw DimensionError(std::string(op) + ": " + std::to_string(x.rows()) +
                         " rows are not a multiple of seq_len " + std::to_string(seq_len));
  }
  if (x.cols() % static_cast<Eigen::Index>(heads) != 0) {
    throw DimensionError(std::string(op) + ": width " + std::to_string(x.cols()) +
                         " not divisible by " + std::to_string(heads) + " heads");
  }
}

// Left-to-right sums. Forward passes use these instead of Eigen reductions,
// whose vectorized order depends on a row's memory alignment; with them a
// row's result does not depend on where the row sits in the matrix.
template <typename T>
T ordered_sum(const T* x, Eigen::Index n) {
  T s = T(0);
  for (Eigen::Index i = 0; i < n; ++i) s += x[i];
  return s;
}

template <typename T>
T ordered_dot(const T* a, const T* b, Eigen::Index n) {
  T s = T(0);
  for (Eigen::Index i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

// x * w^T. Rows of x become columns of a GEMM whose column count is padded to
// a multiple of 8, so every row is handled by the same kernel path.
template <typename T>
Matrix<T> row_stable_product(const Matrix<T>& x, const Matrix<T>& w) {
  const Eigen::Index rows = x.rows();
  const Eigen::Index padded = std::max<Eigen::Index>(8, (rows + 7) / 8 * 8);
  Matrix<T> xp = Matrix<T>::Zero(padded, x.cols());
  xp.topRows(rows) = x;
  Matrix<T> yp(padded, w.rows());
  yp.transpose().noalias() = w * xp.transpose();
  return yp.topRows(rows);
}

template <typename T>
T stable_sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

}  // namespace

template <typename T>
Var<T> linear(Var<T> x, Var<T> weight, Var<T> bias) {
  const Matrix<T>& xv = x.value();
  const Matrix<T>& wv = weight.value();
  const Matrix<T>& bv = bias.value();
  if (xv.cols() != wv.cols()) {
    throw DimensionError("linear: input " + shape_string(xv) + " incompatible with weight " +
                         shape_string(wv));
  }
  if (bv.rows() != wv.rows() || bv.cols() != 1) {
    throw DimensionError("linear: bias " + shape_string(bv) + " incompatible with weight " +
                         shape_string(wv));
  }
  Matrix<T> y = row_stable_product(xv, wv);
  y.rowwise() += bv.col(0).transpose();
  return x.tape->emit(std::move(y), {x, weight, bias}, [x, weight, bias](Tape<T>& t, const Matrix<T>& dy) {
    if (t.requires_grad(x)) t.grad(x).noalias() += dy * weight.value();
    if (t.requires_grad(weight)) t.grad(weight).noalias() += dy.transpose() * x.value();
    if (t.requires_grad(bias)) t.grad(bias).col(0) += dy.colwise().sum().transpose();
  });
}

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  require_same_shape("add", a, b);
  Matrix<T> y = a.value() + b.value();
  return a.tape->emit(std::move(y), {a, b}, [a, b](Tape<T>& t, const Matrix<T>& dy) {
    if (t.requires_grad(a)) t.grad(a) += dy;
    if (t.requires_grad(b)) t.grad(b) += dy;
  });
}

template <typename T>
Var<T> sub(Var<T> a, Var<T> b) {
  require_same_shape("sub", a, b);
  Matrix<T> y = a.value() - b.value();
  return a.tape->emit(std::move(y), {a, b}, [a, b](Tape<T>& t, const Matrix<T>& dy) {
    if (t.requires_grad(a)) t.grad(a) += dy;
    if (t.requires_grad(b)) t.grad(b) -= dy;
  });
}

template <typename T>
Var<T> hadamard(Var<T> a, Var<T> b) {
  require_same_shape("hadamard", a, b);
  Matrix<T> y = a.value().cwiseProduct(b.value());
  return a.tape->emit(std::move(y), {a, b}, [a, b](Tape<T>& t, const Matrix<T>& dy) {
    if (t.requires_grad(a)) t.grad(a) += dy.cwiseProduct(b.value());
    if (t.requires_grad(b)) t.grad(b) += dy.cwiseProduct(a.value());
  });
}

template <typename T>
Var<T> scale(Var<T> a, T factor) {
  Matrix<T> y = a.value() * factor;
  return a.tape->emit(std::move(y), {a}, [a, factor](Tape<T>& t, const Matrix<T>& dy) {
    t.grad(a) += dy * factor;
  });
}

template <typename T>
Var<T> relu(Var<T> x) {
  Matrix<T> y = x.value().cwiseMax(T(0));
  return x.tape->emit(std::move(y), {x}, [x](Tape<T>& t, const Matrix<T>& dy) {
    t.grad(x).array() += (x.value().array() > T(0)).select(dy.array(), T(0));
  });
}

template <typename T>
Var<T> sigmoid(Var<T> x) {
  Matrix<T> y = x.value().unaryExpr([](T v) { return stable_sigmoid(v); });
  Matrix<T> slope = y.unaryExpr([](T s) { return s * (T(1) - s); });
  return x.tape->emit(std::move(y), {x}, [x, slope = std::move(slope)](Tape<T>& t, const Matrix<T>& dy) {
    t.grad(x) += dy.cwiseProduct(slope);
  });
}

template <typename T>
Var<T> layer_norm(Var<T> x, Var<T> gain, Var<T> shift, T eps) {
  const Matrix<T>& xv = x.value();
  const Eigen::Index d = xv.cols();
  if (gain.rows() != d || gain.cols() != 1 || shift.rows() != d || shift.cols() != 1) {
    throw DimensionError("layer_norm: input " + shape_string(xv) + " incompatible with gain " +
                         shape_string(gain.value()) + " / shift " + shape_string(shift.value()));
  }
  Matrix<T> xhat(xv.rows(), d);
  Eigen::Matrix<T, Eigen::Dynamic, 1> inv_std(xv.rows());
  for (Eigen::Index r = 0; r < xv.rows(); ++r) {
    const T mean = ordered_sum(&xv(r, 0), d) / static_cast<T>(d);
    xhat.row(r) = (xv.row(r).array() - mean).matrix();
    const T var = ordered_dot(&xhat(r, 0), &xhat(r, 0), d) / static_cast<T>(d);
    inv_std(r) = T(1) / std::sqrt(var + eps);
    xhat.row(r) *= inv_std(r);
  }
  Matrix<T> y = xhat;
  y.array().rowwise() *= gain.value().col(0).transpose().array();
  y.rowwise() += shift.value().col(0).transpose();
  return x.tape->emit(
      std::move(y), {x, gain, shift},
      [x, gain, shift, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape<T>& t, const Matrix<T>& dy) {
        if (t.requires_grad(gain)) t.grad(gain).col(0) += dy.cwiseProduct(xhat).colwise().sum().transpose();
        if (t.requires_grad(shift)) t.grad(shift).col(0) += dy.colwise().sum().transpose();
        if (!t.requires_grad(x)) return;
        Matrix<T> dxhat = dy;
        dxhat.array().rowwise() *= gain.value().col(0).transpose().array();
        Matrix<T>& dx = t.grad(x);
        for (Eigen::Index r = 0; r < dy.rows(); ++r) {
          const T mean_d = dxhat.row(r).mean();
          const T mean_dx = dxhat.row(r).dot(xhat.row(r)) / static_cast<T>(dy.cols());
          dx.row(r) += inv_std(r) * ((dxhat.row(r).array() - mean_d).matrix() - mean_dx * xhat.row(r));
        }
      });
}

template <typename T>
Var<T> attention_probs(Var<T> q, Var<T> k, std::size_t heads, std::size_t seq_len) {
  require_same_shape("attention_probs", q, k);
  require_blocks("attention_probs", q, heads, seq_len);
  const auto S = static_cast<Eigen::Index>(seq_len);
  const auto H = static_cast<Eigen::Index>(heads);
  const Eigen::Index blocks = q.rows() / S;
  const Eigen::Index dh = q.cols() / H;
  const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(dh));
  const Matrix<T>& qv = q.value();
  const Matrix<T>& kv = k.value();

  Matrix<T> probs(blocks * H * S, S);
  for (Eigen::Index b = 0; b < blocks; ++b) {
    for (Eigen::Index h = 0; h < H; ++h) {
      auto p = probs.block((b * H + h) * S, 0, S, S);
      for (Eigen::Index i = 0; i < S; ++i) {
        for (Eigen::Index j = 0; j < S; ++j) {
          p(i, j) = ordered_dot(&qv(b * S + i, h * dh), &kv(b * S + j, h * dh), dh) * inv_sqrt;
        }
        const T mx = p.row(i).maxCoeff();
        for (Eigen::Index j = 0; j < S; ++j) p(i, j) = std::exp(p(i, j) - mx);
        const T total = ordered_sum(&p(i, 0), S);
        for (Eigen::Index j = 0; j < S; ++j) p(i, j) /= total;
      }
    }
  }
  return q.tape->emit(std::move(probs), {q, k}, [q, k, out_id = q.tape->size(), S, H, blocks, dh, inv_sqrt](
                                                    Tape<T>& t, const Matrix<T>& dp) {
    const Matrix<T>& pv = t.value(out_id);
    const bool gq = t.requires_grad(q);
    const bool gk = t.requires_grad(k);
    Matrix<T> ds(S, S);
    for (Eigen::Index b = 0; b < blocks; ++b) {
      for (Eigen::Index h = 0; h < H; ++h) {
        const auto p = pv.block((b * H + h) * S, 0, S, S);
        const auto g = dp.block((b * H + h) * S, 0, S, S);
        for (Eigen::Index i = 0; i < S; ++i) {
          const T dot = g.row(i).dot(p.row(i));
          ds.row(i) = p.row(i).cwiseProduct((g.row(i).array() - dot).matrix());
        }
        ds *= inv_sqrt;
        if (gq) t.grad(q).block(b * S, h * dh, S, dh).noalias() += ds * k.value().block(b * S, h * dh, S, dh);
        if (gk) {
          t.grad(k).block(b * S, h * dh, S, dh).noalias() += ds.transpose() * q.value().block(b * S, h * dh, S, dh);
        }
      }
    }
  });
}

template <typename T>
Var<T> attention_mix(Var<T> probs, Var<T> v, std::size_t heads, std::size_t seq_len) {
  require_blocks("attention_mix", v, heads, seq_len);
  const auto S = static_cast<Eigen::Index>(seq_len);
  const auto H = static_cast<Eigen::Index>(heads);
  const Eigen::Index blocks = v.rows() / S;
  const Eigen::Index dh = v.cols() / H;
  if (probs.rows() != blocks * H * S || probs.cols() != S) {
    throw DimensionError("attention_mix: probabilities " + shape_string(probs.value()) +
                         " incompatible with values " + shape_string(v.value()));
  }
  const Matrix<T>& pv = probs.value();
  const Matrix<T>& vv = v.value();
  Matrix<T> out(v.rows(), v.cols());
  for (Eigen::Index b = 0; b < blocks; ++b) {
    for (Eigen::Index h = 0; h < H; ++h) {
      for (Eigen::Index i = 0; i < S; ++i) {
        T* row = &out(b * S + i, h * dh);
        std::fill(row, row + dh, T(0));
        for (Eigen::Index j = 0; j < S; ++j) {
          const T p = pv((b * H + h) * S + i, j);
          const T* src = &vv(b * S + j, h * dh);
          for (Eigen::Index c = 0; c < dh; ++c) row[c] += p * src[c];
        }
      }
    }
  }
  return v.tape->emit(std::move(out), {probs, v}, [probs, v, S, H, blocks, dh](Tape<T>& t, const Matrix<T>& dy) {
    const bool gp = t.requires_grad(probs);
    const bool gv = t.requires_grad(v);
    for (Eigen::Index b = 0; b < blocks; ++b) {
      for (Eigen::Index h = 0; h < H; ++h) {
        const auto dyb = dy.block(b * S, h * dh, S, dh);
        if (gp) {
          t.grad(probs).block((b * H + h) * S, 0, S, S).noalias() +=
              dyb * v.value().block(b * S, h * dh, S, dh).transpose();
        }
        if (gv) {
          t.grad(v).block(b * S, h * dh, S, dh).noalias() +=
              probs.value().block((b * H + h) * S, 0, S, S).transpose() * dyb;
        }
      }
    }
  });
}

template <typename T>
Var<T> attention_head_mean(Var<T> probs, std::size_t heads, std::size_t seq_len, std::size_t from,
                           std::size_t to) {
  const auto S = static_cast<Eigen::Index>(seq_len);
  const auto H = static_cast<Eigen::Index>(heads);
  if (heads == 0 || seq_len == 0 || probs.cols() != S || probs.rows() % (H * S) != 0 || from >= seq_len ||
      to >= seq_len) {
    throw DimensionError("attention_head_mean: probabilities " + shape_string(probs.value()) +
                         " incompatible with heads=" + std::to_string(heads) +
                         " seq_len=" + std::to_string(seq_len));
  }
  const Eigen::Index blocks = probs.rows() / (H * S);
  const auto f = static_cast<Eigen::Index>(from);
  const auto c = static_cast<Eigen::Index>(to);
  Matrix<T> out(blocks, 1);
  for (Eigen::Index b = 0; b < blocks; ++b) {
    T sum = T(0);
    for (Eigen::Index h = 0; h < H; ++h) sum += probs.value()((b * H + h) * S + f, c);
    out(b, 0) = sum / static_cast<T>(H);
  }
  return probs.tape->emit(std::move(out), {probs}, [probs, S, H, blocks, f, c](Tape<T>& t, const Matrix<T>& dy) {
    Matrix<T>& g = t.grad(probs);
    for (Eigen::Index b = 0; b < blocks; ++b) {
      for (Eigen::Index h = 0; h < H; ++h) g((b * H + h) * S + f, c) += dy(b, 0) / static_cast<T>(H);
    }
  });
}

template <typename T>
Var<T> strided_rows(Var<T> x, std::size_t start, std::size_t stride, std::size_t count) {
  const auto s = static_cast<Eigen::Index>(start);
  const auto st = static_cast<Eigen::Index>(stride);
  const auto n = static_cast<Eigen::Index>(count);
  if (stride == 0 || (n > 0 && s + (n - 1) * st >= x.rows())) {
    throw DimensionError("strided_rows: selection out of range for " + shape_string(x.value()));
  }
  Matrix<T> out(n, x.cols());
  for (Eigen::Index i = 0; i < n; ++i) out.row(i) = x.value().row(s + i * st);
  return x.tape->emit(std::move(out), {x}, [x, s, st, n](Tape<T>& t, const Matrix<T>& dy) {
    Matrix<T>& g = t.grad(x);
    for (Eigen::Index i = 0; i < n; ++i) g.row(s + i * st) += dy.row(i);
  });
}

template <typename T>
Var<T> slice_rows(Var<T> x, std::size_t start, std::size_t count) {
  return strided_rows(x, start, 1, count);
}

template <typename T>
Var<T> concat_cols(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) {
      throw DimensionError("concat_cols: row mismatch " + shape_string(parts.front().value()) + " vs " +
                           shape_string(p.value()));
    }
    cols += p.cols();
  }
  Matrix<T> out(rows, cols);
  Eigen::Index offset = 0;
  for (const auto& p : parts) {
    out.middleCols(offset, p.cols()) = p.value();
    offset += p.cols();
  }
  return parts.front().tape->emit(std::move(out), parts, [parts](Tape<T>& t, const Matrix<T>& dy) {
    Eigen::Index off = 0;
    for (const auto& p : parts) {
      if (t.requires_grad(p)) t.grad(p) += dy.middleCols(off, p.cols());
      off += p.cols();
    }
  });
}

template <typename T>
Var<T> concat_rows(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const Eigen::Index cols = parts.front().cols();
  Eigen::Index rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) {
      throw DimensionError("concat_rows: column mismatch " + shape_string(parts.front().value()) + " vs " +
                           shape_string(p.value()));
    }
    rows += p.rows();
  }
  Matrix<T> out(rows, cols);
  Eigen::Index offset = 0;
  for (const auto& p : parts) {
    out.middleRows(offset, p.rows()) = p.value();
    offset += p.rows();
  }
  return parts.front().tape->emit(std::move(out), parts, [parts](Tape<T>& t, const Matrix<T>& dy) {
    Eigen::Index off = 0;
    for (const auto& p : parts) {
      if (t.requires_grad(p)) t.grad(p) += dy.middleRows(off, p.rows());
      off += p.rows();
    }
  });
}

template <typename T>
Var<T> repeat_rows(Var<T> row, std::size_t n) {
  if (row.rows() != 1) throw DimensionError("repeat_rows: expected a single row, got " + shape_string(row.value()));
  Matrix<T> out = row.value().replicate(static_cast<Eigen::Index>(n), 1);
  return row.tape->emit(std::move(out), {row}, [row](Tape<T>& t, const Matrix<T>& dy) {
    t.grad(row) += dy.colwise().sum();
  });
}

template <typename T>
Var<T> convex_fusion(Var<T> w, Var<T> l, Var<T> g) {
  require_same_shape("convex_fusion", w, l);
  require_same_shape("convex_fusion", l, g);
  const Matrix<T>& wv = w.value();
  const Matrix<T>& lv = l.value();
  const Matrix<T>& gv = g.value();
  Matrix<T> out(wv.rows(), wv.cols());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const T mixed = wv(i) * lv(i) + (T(1) - wv(i)) * gv(i);
    out(i) = std::clamp(mixed, std::min(lv(i), gv(i)), std::max(lv(i), gv(i)));
  }
  return w.tape->emit(std::move(out), {w, l, g}, [w, l, g](Tape<T>& t, const Matrix<T>& dy) {
    if (t.requires_grad(w)) t.grad(w) += dy.cwiseProduct(l.value() - g.value());
    if (t.requires_grad(l)) t.grad(l) += dy.cwiseProduct(w.value());
    if (t.requires_grad(g)) {
      t.grad(g) += dy.cwiseProduct((T(1) - w.value().array()).matrix());
    }
  });
}

template <typename T>
Var<T> scalar_function(Var<T> x, T value, Matrix<T> dvalue_dx) {
  if (dvalue_dx.rows() != x.rows() || dvalue_dx.cols() != x.cols()) {
    throw DimensionError("scalar_function: gradient " + shape_string(dvalue_dx) + " vs input " +
                         shape_string(x.value()));
  }
  Matrix<T> out(1, 1);
  out(0, 0) = value;
  return x.tape->emit(std::move(out), {x}, [x, d = std::move(dvalue_dx)](Tape<T>& t, const Matrix<T>& dy) {
    t.grad(x) += dy(0, 0) * d;
  });
}

#define DUALVIEW_INSTANTIATE_OPS(T)                                                                  \
  template Var<T> linear(Var<T>, Var<T>, Var<T>);                                                    \
  template Var<T> add(Var<T>, Var<T>);                                                               \
  template Var<T> sub(Var<T>, Var<T>);                                                               \
  template Var<T> hadamard(Var<T>, Var<T>);                                                          \
  template Var<T> scale(Var<T>, T);                                                                  \
  template Var<T> relu(Var<T>);                                                                      \
  template Var<T> sigmoid(Var<T>);                                                                   \
  template Var<T> layer_norm(Var<T>, Var<T>, Var<T>, T);                                             \
  template Var<T> attention_probs(Var<T>, Var<T>, std::size_t, std::size_t);                         \
  template Var<T> attention_mix(Var<T>, Var<T>, std::size_t, std::size_t);                           \
  template Var<T> attention_head_mean(Var<T>, std::size_t, std::size_t, std::size_t, std::size_t);   \
  template Var<T> strided_rows(Var<T>, std::size_t, std::size_t, std::size_t);                       \
  template Var<T> slice_rows(Var<T>, std::size_t, std::size_t);                                      \
  template Var<T> concat_cols(const std::vector<Var<T>>&);                                           \
  template Var<T> concat_rows(const std::vector<Var<T>>&);                                           \
  template Var<T> repeat_rows(Var<T>, std::size_t);                                                  \
  template Var<T> convex_fusion(Var<T>, Var<T>, Var<T>);                                             \
  template Var<T> scalar_function(Var<T>, T, Matrix<T>);

DUALVIEW_INSTANTIATE_OPS(float)
DUALVIEW_INSTANTIATE_OPS(double)

#undef DUALVIEW_INSTANTIATE_OPS

}  // namespace dualview::nn::ops
