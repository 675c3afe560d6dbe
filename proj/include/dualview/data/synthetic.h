#pragma once

#include "dualview/data/candidate_set.h"

#include <cstddef>
#include <cstdint>
#include <string>

namespace dualview::data {

enum class SyntheticMode { kPlantedSimilarity, kComplementaryPair };

std::string to_string(SyntheticMode mode);
// Throws ConfigError for unknown names.
SyntheticMode parse_synthetic_mode(const std::string& name);

// Desk-scale stand-in for the cached-embedding benchmarks.
//
// planted_similarity: q uniform on the unit sphere; each gold is
//   normalize(q + sigma * z) with z ~ N(0, I/d); negatives uniform on the sphere.
//
// complementary_pair: orthonormal u, v; q = normalize(u + v); golds are
//   normalize(u + sigma*z1) and normalize(v + sigma*z2), so each is only
//   half-aligned with q while together they span it. Distractors:
//     - one near-copy normalize(q + sigma*z) (cosine ~1, outranks the pair),
//     - half-aligned copies normalize(q + r + sigma*z) with r a unit vector
//       orthogonal to q, indistinguishable from a gold when viewed alone,
//     - floor((n - 6) / 2) uniform random vectors when n > 6.
//   Only the set view reveals which two half-aligned documents complete q.
//
// Candidate order is shuffled per query; output is a pure function of the config.
struct SyntheticConfig {
  SyntheticMode mode = SyntheticMode::kPlantedSimilarity;
  std::size_t n_queries = 100;
  std::size_t n_candidates = 6;
  std::size_t embed_dim = 64;
  double noise_sigma = 0.3;
  std::size_t n_gold = 2;
  std::uint64_t seed = 42;
  std::string id_prefix = "q";

  // Throws ConfigError.
  void validate() const;
};

Dataset generate_synthetic(const SyntheticConfig& cfg);

}  // namespace dualview::data
