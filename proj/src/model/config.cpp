#include "dualview/model/config.h"

#include "dualview/errors.h"

#include <cstdio>
#include <map>

namespace dualview::model {

std::string to_string(Ablation a) {
  switch (a) {
    case Ablation::kFull:
      return "full";
    case Ablation::kAvgFusion:
      return "avg_fusion";
    case Ablation::kNoGlobal:
      return "no_global";
    case Ablation::kNoLocal:
      return "no_local";
  }
  return "full";
}

Ablation parse_ablation(const std::string& name) {
  for (Ablation a : kAllAblations) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("unknown ablation '" + name + "' (expected full, avg_fusion, no_global or no_local)");
}

void ModelConfig::validate() const {
  if (embed_dim == 0 || global_dim == 0) throw ConfigError("embed_dim and global_dim must be positive");
  if (local_heads == 0 || embed_dim % local_heads != 0) {
    throw ConfigError("embed_dim " + std::to_string(embed_dim) + " is not divisible by local_heads " +
                      std::to_string(local_heads));
  }
  if (global_heads == 0 || global_dim % global_heads != 0) {
    throw ConfigError("global_dim " + std::to_string(global_dim) + " is not divisible by global_heads " +
                      std::to_string(global_heads));
  }
  if (max_candidates < 1) throw ConfigError("max_candidates must be at least 1");
  if (local_layers < 1 || global_layers < 1) throw ConfigError("layer counts must be at least 1");
  if (local_mlp_hidden == 0 || global_mlp_hidden == 0 || gate_hidden == 0) {
    throw ConfigError("hidden widths must be positive");
  }
}

nn::KeyValues ModelConfig::to_key_values() const {
  return {
      {"embed_dim", std::to_string(embed_dim)},
      {"local_layers", std::to_string(local_layers)},
      {"local_heads", std::to_string(local_heads)},
      {"global_dim", std::to_string(global_dim)},
      {"global_layers", std::to_string(global_layers)},
      {"global_heads", std::to_string(global_heads)},
      {"max_candidates", std::to_string(max_candidates)},
      {"local_mlp_hidden", std::to_string(local_mlp_hidden)},
      {"global_mlp_hidden", std::to_string(global_mlp_hidden)},
      {"gate_hidden", std::to_string(gate_hidden)},
      {"ablation", to_string(ablation)},
  };
}

ModelConfig ModelConfig::from_key_values(const nn::KeyValues& kv) {
  ModelConfig cfg;
  const std::map<std::string, std::size_t*> sizes{
      {"embed_dim", &cfg.embed_dim},
      {"local_layers", &cfg.local_layers},
      {"local_heads", &cfg.local_heads},
      {"global_dim", &cfg.global_dim},
      {"global_layers", &cfg.global_layers},
      {"global_heads", &cfg.global_heads},
      {"max_candidates", &cfg.max_candidates},
      {"local_mlp_hidden", &cfg.local_mlp_hidden},
      {"global_mlp_hidden", &cfg.global_mlp_hidden},
      {"gate_hidden", &cfg.gate_hidden},
  };
  for (const auto& [k, v] : kv) {
    if (k == "ablation") {
      cfg.ablation = parse_ablation(v);
      continue;
    }
    auto it = sizes.find(k);
    if (it == sizes.end()) continue;
    try {
      std::size_t pos = 0;
      *it->second = std::stoul(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
    } catch (const std::logic_error&) {
      throw ConfigError("config key '" + k + "' has non-integer value '" + v + "'");
    }
  }
  return cfg;
}

std::vector<std::string> ModelConfig::diff(const ModelConfig& other) const {
  std::vector<std::string> out;
  const auto a = to_key_values();
  const auto b = other.to_key_values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].second != b[i].second) out.push_back(a[i].first + ": " + a[i].second + " vs " + b[i].second);
  }
  return out;
}

std::string fingerprint_of(const nn::KeyValues& kv) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  for (const auto& [k, v] : kv) {
    mix(k);
    mix("=");
    mix(v);
    mix("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string ModelConfig::fingerprint() const { return fingerprint_of(to_key_values()); }

}  // namespace dualview::model
