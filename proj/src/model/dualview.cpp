#include "dualview/model/dualview.h"

#include "dualview/errors.h"
#include "dualview/nn/ops.h"

#include <cmath>
#include <random>

namespace dualview::model {

namespace ops = nn::ops;
using nn::Matrix;
using nn::Tape;
using nn::Var;

template <typename T>
LocalScorer<T>::LocalScorer(nn::ParameterRegistry<T>& registry, const ModelConfig& cfg, nn::Rng& rng)
    : embed_dim_(cfg.embed_dim) {
  for (std::size_t l = 0; l < cfg.local_layers; ++l) {
    const std::string prefix = "local.layer" + std::to_string(l);
    Layer layer;
    layer.attention = nn::MultiHeadSelfAttention<T>(registry, prefix + ".attention", cfg.embed_dim,
                                                    cfg.local_heads, rng);
    layer.norm = nn::LayerNorm<T>(registry, prefix + ".norm", cfg.embed_dim);
    layers_.push_back(std::move(layer));
  }
  mlp_ = nn::ScoreMlp<T>(registry, "local.mlp", cfg.local_feature_dim(), cfg.local_mlp_hidden, rng);
}

template <typename T>
LocalOutput<T> LocalScorer<T>::forward(Tape<T>& tape, const Matrix<T>& query, const Matrix<T>& docs) const {
  const auto n = static_cast<std::size_t>(docs.rows());
  Matrix<T> pairs(2 * docs.rows(), docs.cols());
  for (Eigen::Index i = 0; i < docs.rows(); ++i) {
    pairs.row(2 * i) = query.row(0);
    pairs.row(2 * i + 1) = docs.row(i);
  }
  Var<T> x = tape.constant(std::move(pairs));
  Var<T> probs{};
  for (const Layer& layer : layers_) {
    const nn::AttentionOutput<T> att = layer.attention.forward(tape, x, 2);
    x = layer.norm.forward(tape, ops::add(x, att.output));
    probs = att.weights;
  }
  const Var<T> q_r = ops::strided_rows(x, 0, 2, n);
  const Var<T> c_r = ops::strided_rows(x, 1, 2, n);
  const Var<T> attn = ops::attention_head_mean(probs, layers_.back().attention.heads(), 2, 0, 1);
  const Var<T> features = ops::concat_cols<T>({q_r, c_r, ops::hadamard(q_r, c_r), attn});
  return {features, mlp_.forward(tape, features)};
}

template <typename T>
Var<T> LocalScorer<T>::passthrough_features(Tape<T>& tape, const Matrix<T>& query, const Matrix<T>& docs) {
  const Eigen::Index n = docs.rows();
  const Eigen::Index d = docs.cols();
  Matrix<T> f(n, 3 * d + 1);
  const double qn = static_cast<double>(query.template cast<double>().norm());
  for (Eigen::Index i = 0; i < n; ++i) {
    f.block(i, 0, 1, d) = query.row(0);
    f.block(i, d, 1, d) = docs.row(i);
    f.block(i, 2 * d, 1, d) = query.row(0).cwiseProduct(docs.row(i));
    const double cn = static_cast<double>(docs.row(i).template cast<double>().norm());
    const double dot = static_cast<double>(query.row(0).template cast<double>().dot(docs.row(i).template cast<double>()));
    const double cos = (qn > 0.0 && cn > 0.0) ? dot / (qn * cn) : 0.0;
    f(i, 3 * d) = static_cast<T>((cos + 1.0) / 2.0);
  }
  return tape.constant(std::move(f));
}

template <typename T>
GlobalScorer<T>::GlobalScorer(nn::ParameterRegistry<T>& registry, const ModelConfig& cfg, nn::Rng& rng)
    : project_(registry, "global.project", cfg.local_feature_dim(), cfg.global_dim, rng),
      query_project_(registry, "global.query_project", cfg.embed_dim, cfg.global_dim, rng) {
  std::normal_distribution<double> dist(0.0, 0.02);
  Matrix<T> pos(cfg.max_candidates, cfg.global_dim);
  for (Eigen::Index i = 0; i < pos.size(); ++i) pos.data()[i] = static_cast<T>(dist(rng));
  positions_ = &registry.add("global.positions", std::move(pos));
  for (std::size_t l = 0; l < cfg.global_layers; ++l) {
    const std::string prefix = "global.layer" + std::to_string(l);
    Layer layer;
    layer.attention =
        nn::MultiHeadSelfAttention<T>(registry, prefix + ".attention", cfg.global_dim, cfg.global_heads, rng);
    layer.norm = nn::LayerNorm<T>(registry, prefix + ".norm", cfg.global_dim);
    layers_.push_back(std::move(layer));
  }
  mlp_ = nn::ScoreMlp<T>(registry, "global.mlp", cfg.global_dim, cfg.global_mlp_hidden, rng);
}

template <typename T>
GlobalOutput<T> GlobalScorer<T>::forward(Tape<T>& tape, const Matrix<T>& query, Var<T> local_features) const {
  const auto n = static_cast<std::size_t>(local_features.rows());
  const auto capacity = static_cast<std::size_t>(positions_->value().rows());
  if (n > capacity) {
    throw CapacityError("candidate set of size " + std::to_string(n) + " exceeds positional capacity " +
                        std::to_string(capacity));
  }
  const Var<T> docs =
      ops::add(project_.forward(tape, local_features), ops::slice_rows(tape.parameter(*positions_), 0, n));
  const Var<T> query_token = query_project_.forward(tape, tape.constant(query));
  Var<T> seq = ops::concat_rows<T>({query_token, docs});
  for (const Layer& layer : layers_) {
    const nn::AttentionOutput<T> att = layer.attention.forward(tape, seq, n + 1);
    seq = layer.norm.forward(tape, ops::add(seq, att.output));
  }
  const Var<T> features = ops::slice_rows(seq, 1, n);
  return {features, mlp_.forward(tape, features)};
}

template <typename T>
AdaptiveGate<T>::AdaptiveGate(nn::ParameterRegistry<T>& registry, const ModelConfig& cfg, nn::Rng& rng)
    : feature_(registry, "gate.feature", cfg.gate_feature_dim(), cfg.gate_hidden, rng),
      query_(registry, "gate.query", cfg.embed_dim, cfg.gate_hidden, rng),
      gate_(registry, "gate.out", 2 * cfg.gate_hidden, 1, rng) {}

template <typename T>
GateOutput<T> AdaptiveGate<T>::forward(Tape<T>& tape, const Matrix<T>& query, Var<T> local_features,
                                       Var<T> local_scores, Var<T> global_scores, Var<T> global_features) const {
  const auto n = static_cast<std::size_t>(local_scores.rows());
  const Var<T> doc = ops::concat_cols<T>({local_features, local_scores, global_scores, global_features});
  const Var<T> h_doc = feature_.forward(tape, doc);
  const Var<T> h_query = ops::repeat_rows(query_.forward(tape, tape.constant(query)), n);
  const Var<T> weights = ops::sigmoid(gate_.forward(tape, ops::concat_cols<T>({h_doc, h_query})));
  return {weights, ops::convex_fusion(weights, local_scores, global_scores)};
}

template <typename T>
DualViewModel<T>::DualViewModel(ModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  cfg_.validate();
  nn::Rng rng(seed);
  local_ = LocalScorer<T>(registry_, cfg_, rng);
  global_ = GlobalScorer<T>(registry_, cfg_, rng);
  gate_ = AdaptiveGate<T>(registry_, cfg_, rng);
}

template <typename T>
ForwardPass<T> DualViewModel<T>::forward(Tape<T>& tape, const data::CandidateSet& set) const {
  if (set.candidates.empty()) throw InputError("query '" + set.query_id + "' has no candidates");
  if (set.size() > cfg_.max_candidates) {
    throw CapacityError("query '" + set.query_id + "' has " + std::to_string(set.size()) +
                        " candidates, model capacity is " + std::to_string(cfg_.max_candidates));
  }
  if (set.embed_dim() != cfg_.embed_dim) {
    throw DimensionError("query '" + set.query_id + "' has embedding width " + std::to_string(set.embed_dim()) +
                         ", model expects " + std::to_string(cfg_.embed_dim));
  }
  const Matrix<T> q = query_matrix<T>(set);
  const Matrix<T> docs = document_matrix<T>(set);
  const auto n = static_cast<Eigen::Index>(set.size());

  ForwardPass<T> out;
  if (cfg_.ablation == Ablation::kNoLocal) {
    out.local_features = LocalScorer<T>::passthrough_features(tape, q, docs);
    out.local_scores = tape.constant(Matrix<T>::Zero(n, 1));
  } else {
    const LocalOutput<T> local = local_.forward(tape, q, docs);
    out.local_features = local.features;
    out.local_scores = local.scores;
  }

  if (cfg_.ablation == Ablation::kNoGlobal) {
    out.global_scores = tape.constant(Matrix<T>::Zero(n, 1));
    out.gate_weights = tape.constant(Matrix<T>::Ones(n, 1));
    out.fused = out.local_scores;
    return out;
  }

  const GlobalOutput<T> global = global_.forward(tape, q, out.local_features);
  out.global_features = global.features;
  out.global_scores = global.scores;

  switch (cfg_.ablation) {
    case Ablation::kNoLocal:
      out.gate_weights = tape.constant(Matrix<T>::Zero(n, 1));
      out.fused = out.global_scores;
      break;
    case Ablation::kAvgFusion:
      out.gate_weights = tape.constant(Matrix<T>::Constant(n, 1, T(0.5)));
      out.fused = ops::convex_fusion(out.gate_weights, out.local_scores, out.global_scores);
      break;
    default: {
      const GateOutput<T> gate =
          gate_.forward(tape, q, out.local_features, out.local_scores, out.global_scores, global.features);
      out.gate_weights = gate.weights;
      out.fused = gate.fused;
    }
  }
  return out;
}

template <typename T>
Var<T> DualViewModel<T>::score(Tape<T>& tape, const data::CandidateSet& set) const {
  return forward(tape, set).fused;
}

template <typename T>
ScoreViews<T> DualViewModel<T>::score_views(Tape<T>& tape, const data::CandidateSet& set) const {
  const ForwardPass<T> pass = forward(tape, set);
  ScoreViews<T> out{pass.fused, {}};
  if (cfg_.ablation != Ablation::kNoLocal) out.views.push_back(pass.local_scores);
  if (cfg_.ablation != Ablation::kNoGlobal) out.views.push_back(pass.global_scores);
  return out;
}

template <typename T>
ScoredCandidates DualViewModel<T>::rerank(const data::CandidateSet& set) const {
  Tape<T> tape(false);
  const ForwardPass<T> pass = forward(tape, set);
  const Matrix<T>& f = pass.local_features.value();
  ScoredCandidates out;
  out.documents.resize(set.size());
  std::vector<float> fused(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    DocumentScore& d = out.documents[i];
    d.local = static_cast<float>(pass.local_scores.value()(r, 0));
    d.global = static_cast<float>(pass.global_scores.value()(r, 0));
    d.gate_weight = static_cast<float>(pass.gate_weights.value()(r, 0));
    d.fused = static_cast<float>(pass.fused.value()(r, 0));
    d.local_features.resize(static_cast<std::size_t>(f.cols()));
    for (Eigen::Index c = 0; c < f.cols(); ++c) d.local_features[static_cast<std::size_t>(c)] = static_cast<float>(f(r, c));
    if (pass.global_features) {
      const Matrix<T>& g = pass.global_features->value();
      d.global_feature.resize(static_cast<std::size_t>(g.cols()));
      for (Eigen::Index c = 0; c < g.cols(); ++c) d.global_feature[static_cast<std::size_t>(c)] = static_cast<float>(g(r, c));
    }
    fused[i] = d.fused;
  }
  out.ranking = rank_by_scores(std::span<const float>(fused));
  return out;
}

template <typename T>
nn::KeyValues DualViewModel<T>::checkpoint_header() const {
  nn::KeyValues kv{{"model", "dualview"}};
  for (auto& entry : cfg_.to_key_values()) kv.push_back(std::move(entry));
  return kv;
}

std::size_t parameter_count(const Scorer<float>& model) { return model.parameters().scalar_count(); }

DualViewModel<float> load_dualview(const nn::Checkpoint& ckpt, const std::optional<ModelConfig>& expected) {
  const auto kind = ckpt.get("model");
  if (!kind || *kind != "dualview") {
    throw LoadError("checkpoint holds model '" + kind.value_or("<missing>") + "', expected 'dualview'");
  }
  const ModelConfig stored = ModelConfig::from_key_values(ckpt.header);
  if (expected) {
    const auto differences = expected->diff(stored);
    if (!differences.empty()) {
      std::string msg = "checkpoint configuration differs from the requested one:";
      for (const auto& d : differences) msg += "\n  " + d;
      throw ConfigError(msg);
    }
  }
  DualViewModel<float> model(stored);
  nn::assign_checkpoint(ckpt, model.parameters());
  return model;
}

void save_model(const std::string& path, const Scorer<float>& model) {
  nn::save_checkpoint(path, model.checkpoint_header(), model.parameters());
}

template class LocalScorer<float>;
template class LocalScorer<double>;
template class GlobalScorer<float>;
template class GlobalScorer<double>;
template class AdaptiveGate<float>;
template class AdaptiveGate<double>;
template class DualViewModel<float>;
template class DualViewModel<double>;

}  // namespace dualview::model
