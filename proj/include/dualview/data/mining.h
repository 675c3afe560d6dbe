#pragma once

#include "dualview/data/candidate_set.h"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace dualview::data {

struct Neighbor {
  std::size_t index = 0;  // position in the distractor pool
  double similarity = 0.0;
};

struct MiningResult {
  // neighbors[g] lists the top distractors for gold g, similarity descending,
  // ties broken by pool index ascending.
  std::vector<std::vector<Neighbor>> neighbors;
  // Set when k exceeded the pool size and the lists were truncated.
  bool truncated = false;
};

// Exhaustive cosine scan. Throws InputError on an empty pool.
MiningResult mine_hard_negatives(const std::vector<EmbeddingVector>& gold_pool,
                                 const std::vector<EmbeddingVector>& distractor_pool, std::size_t k);

// Exactly target_n candidates: all golds plus the first target_n - |golds|
// negatives in the given order, shuffled deterministically under `seed`.
// Throws InputError when there are not enough documents.
CandidateSet build_candidate_set(const std::string& query_id, const EmbeddingVector& query,
                                 const std::vector<Candidate>& golds, const std::vector<Candidate>& negatives,
                                 std::size_t target_n, std::uint64_t seed);

// Interleaves per-gold neighbor lists rank by rank (rank 1 of every gold, then
// rank 2, ...) dropping repeated pool indices.
std::vector<std::size_t> merge_neighbors(const MiningResult& mined);

}  // namespace dualview::data
