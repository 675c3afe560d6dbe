#pragma once

#include "dualview/data/candidate_set.h"
#include "dualview/model/config.h"
#include "dualview/model/scorer.h"
#include "dualview/nn/layers.h"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dualview::model {

template <typename T>
struct LocalOutput {
  nn::Var<T> features;  // (n x 3d+1): [q_r ; c_r ; q_r * c_r ; a]
  nn::Var<T> scores;    // (n x 1)
};

// Per-document interaction over the two-token sequence [q ; c_i]: L layers of
// self-attention -> residual -> LayerNorm (no feed-forward sublayer), then a
// two-layer ReLU MLP over the extracted features. Every document is processed
// as an independent block, so local scores are permutation-equivariant.
template <typename T>
class LocalScorer {
 public:
  LocalScorer() = default;
  LocalScorer(nn::ParameterRegistry<T>& registry, const ModelConfig& cfg, nn::Rng& rng);

  LocalOutput<T> forward(nn::Tape<T>& tape, const nn::Matrix<T>& query, const nn::Matrix<T>& docs) const;

  // Pass-through features used by the no_local ablation: q_r = q, c_r = c and
  // a = (cos(q, c) + 1) / 2. Returns constants; the MLP is not applied.
  static nn::Var<T> passthrough_features(nn::Tape<T>& tape, const nn::Matrix<T>& query, const nn::Matrix<T>& docs);

  struct Layer {
    nn::MultiHeadSelfAttention<T> attention;
    nn::LayerNorm<T> norm;
  };
  const std::vector<Layer>& layers() const { return layers_; }

 private:
  std::size_t embed_dim_ = 0;
  std::vector<Layer> layers_;
  nn::ScoreMlp<T> mlp_;
};

template <typename T>
struct GlobalOutput {
  nn::Var<T> features;  // (n x global_dim), query token dropped
  nn::Var<T> scores;    // (n x 1)
};

// Set-level encoder over [q_proj ; h_1 + p_1 ; ... ; h_n + p_n] with
// h_i = Linear(local features_i). Layers are attention -> residual -> LayerNorm.
template <typename T>
class GlobalScorer {
 public:
  GlobalScorer() = default;
  GlobalScorer(nn::ParameterRegistry<T>& registry, const ModelConfig& cfg, nn::Rng& rng);

  // Throws CapacityError when n exceeds the positional table.
  GlobalOutput<T> forward(nn::Tape<T>& tape, const nn::Matrix<T>& query, nn::Var<T> local_features) const;

  nn::Parameter<T>& positions() const { return *positions_; }

  struct Layer {
    nn::MultiHeadSelfAttention<T> attention;
    nn::LayerNorm<T> norm;
  };

 private:
  nn::Linear<T> project_;
  nn::Linear<T> query_project_;
  nn::Parameter<T>* positions_ = nullptr;
  std::vector<Layer> layers_;
  nn::ScoreMlp<T> mlp_;
};

template <typename T>
struct GateOutput {
  nn::Var<T> weights;  // (n x 1), sigmoid output
  nn::Var<T> fused;    // (n x 1)
};

// Query-conditioned fusion weight:
//   h_feat  = Linear_feat([features ; s_local ; s_global ; g])
//   h_query = Linear_query(q)
//   w       = sigmoid(Linear_gate([h_feat ; h_query]))
//   fused   = w * s_local + (1 - w) * s_global
template <typename T>
class AdaptiveGate {
 public:
  AdaptiveGate() = default;
  AdaptiveGate(nn::ParameterRegistry<T>& registry, const ModelConfig& cfg, nn::Rng& rng);

  GateOutput<T> forward(nn::Tape<T>& tape, const nn::Matrix<T>& query, nn::Var<T> local_features,
                        nn::Var<T> local_scores, nn::Var<T> global_scores, nn::Var<T> global_features) const;

  const nn::Linear<T>& feature_projection() const { return feature_; }
  const nn::Linear<T>& query_projection() const { return query_; }
  const nn::Linear<T>& gate_projection() const { return gate_; }

 private:
  nn::Linear<T> feature_;
  nn::Linear<T> query_;
  nn::Linear<T> gate_;
};

template <typename T>
struct ForwardPass {
  nn::Var<T> local_features;
  nn::Var<T> local_scores;
  std::optional<nn::Var<T>> global_features;  // absent for no_global
  nn::Var<T> global_scores;
  nn::Var<T> gate_weights;
  nn::Var<T> fused;
};

struct DocumentScore {
  float local = 0.0f;
  float global = 0.0f;
  float gate_weight = 0.0f;
  float fused = 0.0f;
  std::vector<float> local_features;
  std::vector<float> global_feature;
};

struct ScoredCandidates {
  std::vector<DocumentScore> documents;  // candidate order
  std::vector<std::size_t> ranking;      // indices by descending fused score
};

// Local Scorer + Global Scorer + Adaptive Gate. Every sub-network is always
// registered so checkpoints share one layout across ablations; an ablation only
// changes which parts the forward pass uses.
template <typename T>
class DualViewModel final : public Scorer<T> {
 public:
  explicit DualViewModel(ModelConfig cfg, std::uint64_t seed = 42);

  const ModelConfig& config() const { return cfg_; }
  nn::ParameterRegistry<T>& parameters() override { return registry_; }
  const nn::ParameterRegistry<T>& parameters() const override { return registry_; }

  // Throws InputError for an empty set, CapacityError for n > max_candidates,
  // DimensionError for embeddings of the wrong width.
  ForwardPass<T> forward(nn::Tape<T>& tape, const data::CandidateSet& set) const;
  nn::Var<T> score(nn::Tape<T>& tape, const data::CandidateSet& set) const override;
  // Views are the local and global score columns the ablation actually uses.
  ScoreViews<T> score_views(nn::Tape<T>& tape, const data::CandidateSet& set) const override;

  ScoredCandidates rerank(const data::CandidateSet& set) const;

  nn::KeyValues checkpoint_header() const override;

  const LocalScorer<T>& local_scorer() const { return local_; }
  const GlobalScorer<T>& global_scorer() const { return global_; }
  const AdaptiveGate<T>& gate() const { return gate_; }

 private:
  ModelConfig cfg_;
  nn::ParameterRegistry<T> registry_;
  LocalScorer<T> local_;
  GlobalScorer<T> global_;
  AdaptiveGate<T> gate_;
};

std::size_t parameter_count(const Scorer<float>& model);

// Builds a model from a checkpoint. When `expected` is given, the stored
// configuration must match it exactly (ConfigError listing the differences).
DualViewModel<float> load_dualview(const nn::Checkpoint& ckpt, const std::optional<ModelConfig>& expected = {});
void save_model(const std::string& path, const Scorer<float>& model);

}  // namespace dualview::model
