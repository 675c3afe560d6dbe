#pragma once

#include <cstddef>
#include <span>

// Binary-relevance ranking metrics at a cutoff k. `ranking` lists candidate
// indices best first and must be a permutation of 0..n-1; `gold` lists the
// relevant candidate indices. Every function throws InputError when gold is
// empty, k is 0, or the ranking is not a permutation.
namespace dualview::eval {

// |gold in top-k| / |gold|
double recall_at_k(std::span<const std::size_t> ranking, std::span<const std::size_t> gold, std::size_t k);
// 1 when every gold is in the top k; always 0 when |gold| > k.
double full_hit_at_k(std::span<const std::size_t> ranking, std::span<const std::size_t> gold, std::size_t k);
// DCG / IDCG with gain 1/log2(rank + 1), ranks from 1.
double ndcg_at_k(std::span<const std::size_t> ranking, std::span<const std::size_t> gold, std::size_t k);
// 1 / rank of the first gold within the top k, else 0.
double mrr_at_k(std::span<const std::size_t> ranking, std::span<const std::size_t> gold, std::size_t k);
// |gold in top-k| / k
double precision_at_k(std::span<const std::size_t> ranking, std::span<const std::size_t> gold, std::size_t k);

struct QueryMetrics {
  double recall = 0.0;
  double full_hit = 0.0;
  double ndcg = 0.0;
  double mrr = 0.0;
  double precision = 0.0;
};

QueryMetrics query_metrics(std::span<const std::size_t> ranking, std::span<const std::size_t> gold, std::size_t k);

}  // namespace dualview::eval
