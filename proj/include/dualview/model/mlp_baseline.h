#pragma once

#include "dualview/model/scorer.h"
#include "dualview/nn/layers.h"

#include <cstddef>
#include <cstdint>
#include <memory>

namespace dualview::model {

// Per-document MLP over [q ; c ; q * c] (3d -> hidden -> 1). No attention and
// no set view; the comparison arm for the full reranker.
template <typename T>
class MlpBaseline final : public Scorer<T> {
 public:
  MlpBaseline(std::size_t embed_dim, std::size_t hidden = 256, std::uint64_t seed = 42);

  std::size_t embed_dim() const { return embed_dim_; }
  std::size_t hidden() const { return hidden_; }

  nn::ParameterRegistry<T>& parameters() override { return registry_; }
  const nn::ParameterRegistry<T>& parameters() const override { return registry_; }
  nn::Var<T> score(nn::Tape<T>& tape, const data::CandidateSet& set) const override;
  nn::KeyValues checkpoint_header() const override;

 private:
  std::size_t embed_dim_;
  std::size_t hidden_;
  nn::ParameterRegistry<T> registry_;
  nn::ScoreMlp<T> mlp_;
};

MlpBaseline<float> load_mlp_baseline(const nn::Checkpoint& ckpt);

// Dispatches on the checkpoint's model key.
std::unique_ptr<Scorer<float>> load_scorer(const nn::Checkpoint& ckpt);

}  // namespace dualview::model
