#include "dualview/model/scorer.h"

#include "dualview/errors.h"

#include <algorithm>
#include <numeric>

namespace dualview::model {
namespace {

template <typename S>
std::vector<std::size_t> rank_impl(std::span<const S> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

std::vector<std::size_t> rank_by_scores(std::span<const float> scores) { return rank_impl(scores); }
std::vector<std::size_t> rank_by_scores(std::span<const double> scores) { return rank_impl(scores); }

template <typename T>
nn::Matrix<T> query_matrix(const data::CandidateSet& set) {
  nn::Matrix<T> q(1, static_cast<Eigen::Index>(set.query_embedding.size()));
  for (std::size_t i = 0; i < set.query_embedding.size(); ++i) q(0, static_cast<Eigen::Index>(i)) = set.query_embedding[i];
  return q;
}

template <typename T>
nn::Matrix<T> document_matrix(const data::CandidateSet& set) {
  const auto n = static_cast<Eigen::Index>(set.candidates.size());
  const auto d = static_cast<Eigen::Index>(set.query_embedding.size());
  nn::Matrix<T> docs(n, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& e = set.candidates[static_cast<std::size_t>(r)].embedding;
    if (static_cast<Eigen::Index>(e.size()) != d) {
      throw DimensionError("document '" + set.candidates[static_cast<std::size_t>(r)].doc_id + "' has width " +
                           std::to_string(e.size()) + ", query has " + std::to_string(d));
    }
    for (Eigen::Index c = 0; c < d; ++c) docs(r, c) = e[static_cast<std::size_t>(c)];
  }
  return docs;
}

template <typename T>
std::vector<T> Scorer<T>::score_values(const data::CandidateSet& set) const {
  nn::Tape<T> tape(false);
  const auto& s = score(tape, set).value();
  return std::vector<T>(s.data(), s.data() + s.size());
}

template <typename T>
std::vector<std::size_t> Scorer<T>::rank(const data::CandidateSet& set) const {
  const auto s = score_values(set);
  return rank_by_scores(std::span<const T>(s));
}

template nn::Matrix<float> query_matrix<float>(const data::CandidateSet&);
template nn::Matrix<double> query_matrix<double>(const data::CandidateSet&);
template nn::Matrix<float> document_matrix<float>(const data::CandidateSet&);
template nn::Matrix<double> document_matrix<double>(const data::CandidateSet&);
template class Scorer<float>;
template class Scorer<double>;

}  // namespace dualview::model
