#include "dualview/nn/layers.h"

#include "dualview/errors.h"

#include <cmath>

namespace dualview::nn {

template <typename T>
Linear<T>::Linear(ParameterRegistry<T>& registry, const std::string& name, std::size_t in, std::size_t out,
                  Rng& rng) {
  if (in == 0 || out == 0) throw ConfigError("linear layer '" + name + "' needs positive dimensions");
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix<T> w(out, in);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<T>(dist(rng));
  weight_ = &registry.add(name + ".weight", std::move(w));
  bias_ = &registry.add(name + ".bias", Matrix<T>::Zero(out, 1));
}

template <typename T>
Var<T> Linear<T>::forward(Tape<T>& tape, Var<T> x) const {
  return ops::linear(x, tape.parameter(*weight_), tape.parameter(*bias_));
}

template <typename T>
LayerNorm<T>::LayerNorm(ParameterRegistry<T>& registry, const std::string& name, std::size_t dim, T eps)
    : eps_(eps) {
  gain_ = &registry.add(name + ".gain", Matrix<T>::Ones(dim, 1));
  shift_ = &registry.add(name + ".shift", Matrix<T>::Zero(dim, 1));
}

template <typename T>
Var<T> LayerNorm<T>::forward(Tape<T>& tape, Var<T> x) const {
  return ops::layer_norm(x, tape.parameter(*gain_), tape.parameter(*shift_), eps_);
}

template <typename T>
MultiHeadSelfAttention<T>::MultiHeadSelfAttention(ParameterRegistry<T>& registry, const std::string& name,
                                                  std::size_t model_dim, std::size_t heads, Rng& rng) {
  if (heads == 0 || model_dim % heads != 0) {
    throw ConfigError("attention '" + name + "': model dim " + std::to_string(model_dim) +
                      " not divisible by " + std::to_string(heads) + " heads");
  }
  heads_ = heads;
  head_dim_ = model_dim / heads;
  q_ = Linear<T>(registry, name + ".q", model_dim, model_dim, rng);
  k_ = Linear<T>(registry, name + ".k", model_dim, model_dim, rng);
  v_ = Linear<T>(registry, name + ".v", model_dim, model_dim, rng);
  o_ = Linear<T>(registry, name + ".out", model_dim, model_dim, rng);
}

template <typename T>
AttentionOutput<T> MultiHeadSelfAttention<T>::forward(Tape<T>& tape, Var<T> seq, std::size_t seq_len) const {
  if (seq.rows() < 1) throw DimensionError("attention: empty sequence");
  const Var<T> q = q_.forward(tape, seq);
  const Var<T> k = k_.forward(tape, seq);
  const Var<T> v = v_.forward(tape, seq);
  const Var<T> probs = ops::attention_probs(q, k, heads_, seq_len);
  const Var<T> mixed = ops::attention_mix(probs, v, heads_, seq_len);
  return {o_.forward(tape, mixed), probs};
}

template <typename T>
ScoreMlp<T>::ScoreMlp(ParameterRegistry<T>& registry, const std::string& name, std::size_t in,
                      std::size_t hidden, Rng& rng)
    : hidden_(registry, name + ".hidden", in, hidden, rng), head_(registry, name + ".head", hidden, 1, rng) {}

template <typename T>
Var<T> ScoreMlp<T>::forward(Tape<T>& tape, Var<T> x) const {
  return head_.forward(tape, ops::relu(hidden_.forward(tape, x)));
}

template class Linear<float>;
template class Linear<double>;
template class LayerNorm<float>;
template class LayerNorm<double>;
template class MultiHeadSelfAttention<float>;
template class MultiHeadSelfAttention<double>;
template class ScoreMlp<float>;
template class ScoreMlp<double>;

}  // namespace dualview::nn
