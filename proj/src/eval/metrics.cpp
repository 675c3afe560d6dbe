#include "dualview/eval/metrics.h"

#include "dualview/errors.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace dualview::eval {
namespace {

// Marks gold membership per candidate after validating both lists.
std::vector<char> gold_mask(std::span<const std::size_t> ranking, std::span<const std::size_t> gold, std::size_t k) {
  if (k == 0) throw InputError("metric cutoff k must be positive");
  if (gold.empty()) throw InputError("gold set is empty");
  const std::size_t n = ranking.size();
  std::vector<char> seen(n, 0);
  for (std::size_t idx : ranking) {
    if (idx >= n || seen[idx]) throw InputError("ranking is not a permutation of 0.." + std::to_string(n - 1));
    seen[idx] = 1;
  }
  std::vector<char> mask(n, 0);
  for (std::size_t g : gold) {
    if (g >= n) throw InputError("gold index " + std::to_string(g) + " out of range");
    mask[g] = 1;
  }
  return mask;
}

std::size_t distinct_gold(const std::vector<char>& mask) {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
}

std::size_t hits_in_top(std::span<const std::size_t> ranking, const std::vector<char>& mask, std::size_t k) {
  std::size_t hits = 0;
  for (std::size_t r = 0; r < std::min(k, ranking.size()); ++r) hits += mask[ranking[r]] ? 1 : 0;
  return hits;
}

double discount(std::size_t rank) { return 1.0 / std::log2(static_cast<double>(rank) + 1.0); }

}  // namespace

double recall_at_k(std::span<const std::size_t> ranking, std::span<const std::size_t> gold, std::size_t k) {
  const auto mask = gold_mask(ranking, gold, k);
  return static_cast<double>(hits_in_top(ranking, mask, k)) / static_cast<double>(distinct_gold(mask));
}

double full_hit_at_k(std::span<const std::size_t> ranking, std::span<const std::size_t> gold, std::size_t k) {
  const auto mask = gold_mask(ranking, gold, k);
  return hits_in_top(ranking, mask, k) == distinct_gold(mask) ? 1.0 : 0.0;
}

double ndcg_at_k(std::span<const std::size_t> ranking, std::span<const std::size_t> gold, std::size_t k) {
  const auto mask = gold_mask(ranking, gold, k);
  double dcg = 0.0;
  for (std::size_t r = 0; r < std::min(k, ranking.size()); ++r) {
    if (mask[ranking[r]]) dcg += discount(r + 1);
  }
  double ideal = 0.0;
  for (std::size_t r = 1; r <= std::min(distinct_gold(mask), k); ++r) ideal += discount(r);
  return dcg / ideal;
}

double mrr_at_k(std::span<const std::size_t> ranking, std::span<const std::size_t> gold, std::size_t k) {
  const auto mask = gold_mask(ranking, gold, k);
  for (std::size_t r = 0; r < std::min(k, ranking.size()); ++r) {
    if (mask[ranking[r]]) return 1.0 / static_cast<double>(r + 1);
  }
  return 0.0;
}

double precision_at_k(std::span<const std::size_t> ranking, std::span<const std::size_t> gold, std::size_t k) {
  const auto mask = gold_mask(ranking, gold, k);
  return static_cast<double>(hits_in_top(ranking, mask, k)) / static_cast<double>(k);
}

QueryMetrics query_metrics(std::span<const std::size_t> ranking, std::span<const std::size_t> gold, std::size_t k) {
  return {recall_at_k(ranking, gold, k), full_hit_at_k(ranking, gold, k), ndcg_at_k(ranking, gold, k),
          mrr_at_k(ranking, gold, k), precision_at_k(ranking, gold, k)};
}

}  // namespace dualview::eval
