#include "dualview/data/candidate_set.h"

#include "dualview/errors.h"

#include <cmath>

namespace dualview::data {

std::size_t CandidateSet::gold_count() const {
  std::size_t n = 0;
  for (const auto& c : candidates) n += c.label == 1 ? 1 : 0;
  return n;
}

std::vector<std::size_t> CandidateSet::gold_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].label == 1) out.push_back(i);
  }
  return out;
}

std::vector<int> CandidateSet::labels() const {
  std::vector<int> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) out.push_back(c.label);
  return out;
}

void validate(const CandidateSet& set, const ValidationLimits& limits) {
  const std::size_t dim = limits.embed_dim == 0 ? set.query_embedding.size() : limits.embed_dim;
  if (set.query_embedding.size() != dim) {
    throw InputError("query '" + set.query_id + "': embedding width " + std::to_string(set.query_embedding.size()) +
                     ", expected " + std::to_string(dim));
  }
  if (dim == 0) throw InputError("query '" + set.query_id + "': empty embedding");
  if (set.candidates.empty()) throw InputError("query '" + set.query_id + "': empty candidate list");
  if (set.candidates.size() > limits.max_candidates) {
    throw InputError("query '" + set.query_id + "': " + std::to_string(set.candidates.size()) +
                     " candidates exceed the limit of " + std::to_string(limits.max_candidates));
  }
  for (const auto& c : set.candidates) {
    if (c.embedding.size() != dim) {
      throw InputError("query '" + set.query_id + "' doc '" + c.doc_id + "': embedding width " +
                       std::to_string(c.embedding.size()) + ", expected " + std::to_string(dim));
    }
    if (c.label != 0 && c.label != 1) {
      throw InputError("query '" + set.query_id + "' doc '" + c.doc_id + "': label " + std::to_string(c.label) +
                       " outside {0,1}");
    }
  }
  if (limits.require_gold && set.gold_count() == 0) {
    throw InputError("query '" + set.query_id + "': training sets need at least one gold document");
  }
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace dualview::data
