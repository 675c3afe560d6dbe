#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dualview::data {

using EmbeddingVector = std::vector<float>;

struct Candidate {
  std::string doc_id;
  EmbeddingVector embedding;
  int label = 0;

  bool operator==(const Candidate&) const = default;
};

// One reranking instance: a query and its fixed candidate list.
struct CandidateSet {
  std::string query_id;
  EmbeddingVector query_embedding;
  std::vector<Candidate> candidates;

  std::size_t size() const { return candidates.size(); }
  std::size_t embed_dim() const { return query_embedding.size(); }
  std::size_t gold_count() const;
  std::vector<std::size_t> gold_indices() const;
  std::vector<int> labels() const;

  bool operator==(const CandidateSet&) const = default;
};

using Dataset = std::vector<CandidateSet>;

struct ValidationLimits {
  std::size_t embed_dim = 0;  // 0 accepts the query's width
  std::size_t max_candidates = 10;
  bool require_gold = false;
};

// Throws InputError describing the first violated invariant.
void validate(const CandidateSet& set, const ValidationLimits& limits);

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

}  // namespace dualview::data
