#pragma once

#include "dualview/data/candidate_set.h"
#include "dualview/model/config.h"

#include <cstddef>
#include <random>
#include <string>
#include <vector>

namespace dualview::testing {

// The smallest configuration that still exercises every sub-network.
inline model::ModelConfig tiny_config(model::Ablation ablation = model::Ablation::kFull) {
  model::ModelConfig cfg;
  cfg.embed_dim = 8;
  cfg.local_layers = 1;
  cfg.local_heads = 2;
  cfg.global_dim = 8;
  cfg.global_layers = 1;
  cfg.global_heads = 2;
  cfg.max_candidates = 6;
  cfg.local_mlp_hidden = 6;
  cfg.global_mlp_hidden = 6;
  cfg.gate_hidden = 4;
  cfg.ablation = ablation;
  return cfg;
}

// Gaussian query and candidates; the first `n_gold` candidates are gold.
inline data::CandidateSet random_set(std::mt19937_64& rng, std::size_t n, std::size_t dim, std::size_t n_gold = 1,
                                     float scale = 1.0f) {
  std::normal_distribution<float> d(0.0f, scale);
  data::CandidateSet set;
  set.query_id = "q" + std::to_string(rng() % 100000);
  for (std::size_t j = 0; j < dim; ++j) set.query_embedding.push_back(d(rng));
  for (std::size_t i = 0; i < n; ++i) {
    data::Candidate c{"d" + std::to_string(i), {}, i < n_gold ? 1 : 0};
    for (std::size_t j = 0; j < dim; ++j) c.embedding.push_back(d(rng));
    set.candidates.push_back(std::move(c));
  }
  return set;
}

inline data::CandidateSet permuted(const data::CandidateSet& set, const std::vector<std::size_t>& perm) {
  data::CandidateSet out = set;
  for (std::size_t i = 0; i < perm.size(); ++i) out.candidates[i] = set.candidates[perm[i]];
  return out;
}

}  // namespace dualview::testing
