#pragma once

#include "dualview/nn/ops.h"
#include "dualview/nn/parameter.h"
#include "dualview/nn/tape.h"

#include <cstddef>
#include <random>
#include <string>

namespace dualview::nn {

using Rng = std::mt19937_64;

// Weight (out x in) ~ U(-1/sqrt(in), 1/sqrt(in)); bias (out x 1) zero.
template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(ParameterRegistry<T>& registry, const std::string& name, std::size_t in, std::size_t out, Rng& rng);

  Var<T> forward(Tape<T>& tape, Var<T> x) const;

  std::size_t in_features() const { return static_cast<std::size_t>(weight_->value().cols()); }
  std::size_t out_features() const { return static_cast<std::size_t>(weight_->value().rows()); }
  Parameter<T>& weight() const { return *weight_; }
  Parameter<T>& bias() const { return *bias_; }

 private:
  Parameter<T>* weight_ = nullptr;
  Parameter<T>* bias_ = nullptr;
};

template <typename T>
class LayerNorm {
 public:
  static constexpr double kDefaultEps = 1e-5;

  LayerNorm() = default;
  LayerNorm(ParameterRegistry<T>& registry, const std::string& name, std::size_t dim, T eps = T(kDefaultEps));

  Var<T> forward(Tape<T>& tape, Var<T> x) const;

  Parameter<T>& gain() const { return *gain_; }
  Parameter<T>& shift() const { return *shift_; }
  T eps() const { return eps_; }

 private:
  Parameter<T>* gain_ = nullptr;
  Parameter<T>* shift_ = nullptr;
  T eps_ = T(kDefaultEps);
};

template <typename T>
struct AttentionOutput {
  Var<T> output;
  // One (seq_len x seq_len) softmax matrix per (block, head), block-major.
  Var<T> weights;
};

// Self-attention with Q = K = V projections of the same sequence. The input
// holds `blocks` independent sequences of `seq_len` rows each; attention never
// crosses block boundaries.
template <typename T>
class MultiHeadSelfAttention {
 public:
  MultiHeadSelfAttention() = default;
  // Throws ConfigError when model_dim is not divisible by heads.
  MultiHeadSelfAttention(ParameterRegistry<T>& registry, const std::string& name, std::size_t model_dim,
                         std::size_t heads, Rng& rng);

  AttentionOutput<T> forward(Tape<T>& tape, Var<T> seq, std::size_t seq_len) const;

  std::size_t heads() const { return heads_; }
  std::size_t head_dim() const { return head_dim_; }
  const Linear<T>& query() const { return q_; }
  const Linear<T>& key() const { return k_; }
  const Linear<T>& value() const { return v_; }
  const Linear<T>& out() const { return o_; }

 private:
  std::size_t heads_ = 0;
  std::size_t head_dim_ = 0;
  Linear<T> q_, k_, v_, o_;
};

// Linear -> ReLU -> Linear to a scalar per row.
template <typename T>
class ScoreMlp {
 public:
  ScoreMlp() = default;
  ScoreMlp(ParameterRegistry<T>& registry, const std::string& name, std::size_t in, std::size_t hidden, Rng& rng);

  Var<T> forward(Tape<T>& tape, Var<T> x) const;

 private:
  Linear<T> hidden_;
  Linear<T> head_;
};

// Extracts head h of block b from an attention weight stack.
template <typename T>
Matrix<T> attention_head(const Matrix<T>& weights, std::size_t heads, std::size_t seq_len, std::size_t block,
                         std::size_t head) {
  const auto S = static_cast<Eigen::Index>(seq_len);
  return weights.block((static_cast<Eigen::Index>(block * heads + head)) * S, 0, S, S);
}

}  // namespace dualview::nn
