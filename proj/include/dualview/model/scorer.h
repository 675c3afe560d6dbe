#pragma once

#include "dualview/data/candidate_set.h"
#include "dualview/nn/checkpoint.h"
#include "dualview/nn/parameter.h"
#include "dualview/nn/tape.h"

#include <cstddef>
#include <span>
#include <vector>

namespace dualview::model {

// Stable descending order; equal scores keep original index order.
std::vector<std::size_t> rank_by_scores(std::span<const float> scores);
std::vector<std::size_t> rank_by_scores(std::span<const double> scores);

// Embeddings as a (rows x dim) matrix in the model's precision.
template <typename T>
nn::Matrix<T> query_matrix(const data::CandidateSet& set);
template <typename T>
nn::Matrix<T> document_matrix(const data::CandidateSet& set);

// Final scores plus the intermediate per-view score columns a training
// recipe may supervise directly.
template <typename T>
struct ScoreViews {
  nn::Var<T> final_scores;
  std::vector<nn::Var<T>> views;
};

// A trainable per-document scorer. Implementations are immutable during
// score(), so one frozen instance may serve concurrent callers, each with its
// own tape.
template <typename T>
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual nn::ParameterRegistry<T>& parameters() = 0;
  virtual const nn::ParameterRegistry<T>& parameters() const = 0;

  // Final relevance scores as an (n x 1) column.
  virtual nn::Var<T> score(nn::Tape<T>& tape, const data::CandidateSet& set) const = 0;
  // Defaults to the final scores with no intermediate views.
  virtual ScoreViews<T> score_views(nn::Tape<T>& tape, const data::CandidateSet& set) const {
    return {score(tape, set), {}};
  }

  // Text header written ahead of the parameters in a checkpoint.
  virtual nn::KeyValues checkpoint_header() const = 0;

  std::vector<T> score_values(const data::CandidateSet& set) const;
  std::vector<std::size_t> rank(const data::CandidateSet& set) const;
};

}  // namespace dualview::model
