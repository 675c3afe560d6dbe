#include "dualview/data/mining.h"

#include "dualview/errors.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

namespace dualview::data {

MiningResult mine_hard_negatives(const std::vector<EmbeddingVector>& gold_pool,
                                 const std::vector<EmbeddingVector>& distractor_pool, std::size_t k) {
  if (gold_pool.empty() || distractor_pool.empty()) throw InputError("hard-negative mining needs nonempty pools");
  MiningResult result;
  result.truncated = k > distractor_pool.size();
  const std::size_t take = std::min(k, distractor_pool.size());

  std::vector<double> pool_norms(distractor_pool.size());
  for (std::size_t j = 0; j < distractor_pool.size(); ++j) {
    double s = 0.0;
    for (float x : distractor_pool[j]) s += static_cast<double>(x) * x;
    pool_norms[j] = std::sqrt(s);
  }

  for (const auto& gold : gold_pool) {
    double gn = 0.0;
    for (float x : gold) gn += static_cast<double>(x) * x;
    gn = std::sqrt(gn);
    std::vector<Neighbor> all(distractor_pool.size());
    for (std::size_t j = 0; j < distractor_pool.size(); ++j) {
      const auto& d = distractor_pool[j];
      if (d.size() != gold.size()) throw InputError("hard-negative mining: embedding widths differ");
      double dot = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) dot += static_cast<double>(gold[i]) * d[i];
      const double denom = gn * pool_norms[j];
      all[j] = {j, denom > 0.0 ? dot / denom : 0.0};
    }
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(),
                      [](const Neighbor& a, const Neighbor& b) {
                        if (a.similarity != b.similarity) return a.similarity > b.similarity;
                        return a.index < b.index;
                      });
    all.resize(take);
    result.neighbors.push_back(std::move(all));
  }
  return result;
}

CandidateSet build_candidate_set(const std::string& query_id, const EmbeddingVector& query,
                                 const std::vector<Candidate>& golds, const std::vector<Candidate>& negatives,
                                 std::size_t target_n, std::uint64_t seed) {
  if (golds.size() > target_n || golds.size() + negatives.size() < target_n) {
    throw InputError("cannot build " + std::to_string(target_n) + " candidates for '" + query_id + "' from " +
                     std::to_string(golds.size()) + " golds and " + std::to_string(negatives.size()) +
                     " negatives");
  }
  CandidateSet set;
  set.query_id = query_id;
  set.query_embedding = query;
  for (auto g : golds) {
    g.label = 1;
    set.candidates.push_back(std::move(g));
  }
  for (std::size_t i = 0; set.candidates.size() < target_n; ++i) {
    Candidate c = negatives[i];
    c.label = 0;
    set.candidates.push_back(std::move(c));
  }
  std::mt19937_64 rng(seed);
  std::shuffle(set.candidates.begin(), set.candidates.end(), rng);
  return set;
}

std::vector<std::size_t> merge_neighbors(const MiningResult& mined) {
  std::vector<std::size_t> out;
  std::unordered_set<std::size_t> seen;
  std::size_t depth = 0;
  for (const auto& list : mined.neighbors) depth = std::max(depth, list.size());
  for (std::size_t r = 0; r < depth; ++r) {
    for (const auto& list : mined.neighbors) {
      if (r < list.size() && seen.insert(list[r].index).second) out.push_back(list[r].index);
    }
  }
  return out;
}

}  // namespace dualview::data
