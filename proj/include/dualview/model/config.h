#pragma once

#include "dualview/nn/checkpoint.h"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace dualview::model {

enum class Ablation {
  kFull,       // learned gate fuses local and global scores
  kAvgFusion,  // gate replaced by a fixed 0.5 weight
  kNoGlobal,   // fused score is the local score
  kNoLocal,    // pass-through local features, fused score is the global score
};

std::string to_string(Ablation a);
// Accepts full, avg_fusion, no_global, no_local. Throws ConfigError.
Ablation parse_ablation(const std::string& name);
inline constexpr Ablation kAllAblations[] = {Ablation::kFull, Ablation::kAvgFusion, Ablation::kNoGlobal,
                                             Ablation::kNoLocal};

struct ModelConfig {
  std::size_t embed_dim = 768;
  std::size_t local_layers = 2;
  std::size_t local_heads = 12;
  std::size_t global_dim = 512;
  std::size_t global_layers = 2;
  std::size_t global_heads = 8;
  std::size_t max_candidates = 10;
  std::size_t local_mlp_hidden = 512;
  std::size_t global_mlp_hidden = 256;
  std::size_t gate_hidden = 128;
  Ablation ablation = Ablation::kFull;

  // Throws ConfigError on the first violated invariant.
  void validate() const;

  std::size_t local_head_dim() const { return embed_dim / local_heads; }
  // [q_r ; c_r ; q_r * c_r ; a]
  std::size_t local_feature_dim() const { return 3 * embed_dim + 1; }
  // [local features ; s_local ; s_global]
  std::size_t gate_doc_dim() const { return local_feature_dim() + 2; }
  // [x_doc ; g]
  std::size_t gate_feature_dim() const { return gate_doc_dim() + global_dim; }

  nn::KeyValues to_key_values() const;
  // Unknown keys are ignored; missing keys keep their defaults. Throws ConfigError.
  static ModelConfig from_key_values(const nn::KeyValues& kv);

  // Human-readable "key: expected vs actual" lines; empty when equal.
  std::vector<std::string> diff(const ModelConfig& other) const;
  // FNV-1a over the key-value text.
  std::string fingerprint() const;

  bool operator==(const ModelConfig&) const = default;
};

std::string fingerprint_of(const nn::KeyValues& kv);

}  // namespace dualview::model
